#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels/kernels_internal.hpp"

namespace cartcredit::kernels {
namespace {

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(CARTCREDIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(CARTCREDIT_HAVE_NEON)
      return true;  // Advanced SIMD is mandatory on AArch64.
#else
      return false;
#endif
  }
  return false;
}

Backend detect() {
  if (const char* env = std::getenv("CARTCREDIT_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::Scalar;
    if (want == "avx2" && cpu_supports(Backend::Avx2)) return Backend::Avx2;
    if (want == "neon" && cpu_supports(Backend::Neon)) return Backend::Neon;
  }
  if (cpu_supports(Backend::Avx2)) return Backend::Avx2;
  if (cpu_supports(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{table_for(detect())};
  return table;
}

std::atomic<Backend>& active_tag() {
  static std::atomic<Backend> tag{detect()};
  return tag;
}

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend backend) { return cpu_supports(backend); }

const KernelTable* table_for(Backend backend) {
  if (!cpu_supports(backend)) return nullptr;
  switch (backend) {
    case Backend::Scalar:
      return &detail::kScalarTable;
    case Backend::Avx2:
#if defined(CARTCREDIT_HAVE_AVX2)
      return &detail::kAvx2Table;
#else
      return nullptr;
#endif
    case Backend::Neon:
#if defined(CARTCREDIT_HAVE_NEON)
      return &detail::kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Backend active_backend() { return active_tag().load(); }

bool set_backend(Backend backend) {
  const KernelTable* table = table_for(backend);
  if (table == nullptr) return false;
  active_table().store(table);
  active_tag().store(backend);
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  return active_table().load()->dot(a.data(), b.data(), a.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  require_same_size(w.size(), a.size());
  require_same_size(a.size(), b.size());
  return active_table().load()->weighted_dot(w.data(), a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return active_table().load()->sum(a.data(), a.size()); }

double centered_dot(std::span<const double> a, double ma, std::span<const double> b, double mb) {
  require_same_size(a.size(), b.size());
  return active_table().load()->centered_dot(a.data(), ma, b.data(), mb, a.size());
}

}  // namespace cartcredit::kernels
