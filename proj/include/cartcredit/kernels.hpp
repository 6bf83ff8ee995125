#pragma once

// Data-parallel arithmetic used by the screening statistics.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a vectorized variant (AVX2+FMA on x86-64, NEON on AArch64).
// The active backend is chosen once at first use from the CPU features; it can
// be pinned with set_backend() or the CARTCREDIT_SIMD environment variable
// ("scalar", "avx2", "neon"). Vector variants reassociate sums, so results agree
// with the scalar reference to rounding, not bit-for-bit.

#include <cstddef>
#include <span>
#include <string_view>

namespace cartcredit::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend backend);

bool backend_available(Backend backend);

// Backend used by the free functions below.
Backend active_backend();

// Returns false (and leaves the active backend unchanged) when unavailable.
bool set_backend(Backend backend);

// Σ a_i b_i
double dot(std::span<const double> a, std::span<const double> b);

// Σ w_i a_i b_i
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);

// Σ a_i
double sum(std::span<const double> a);

// Σ (a_i - ma)(b_i - mb)
double centered_dot(std::span<const double> a, double ma, std::span<const double> b, double mb);

// Per-backend entry points, used by the equivalence tests.
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*weighted_dot)(const double*, const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*centered_dot)(const double*, double, const double*, double, std::size_t);
};

// nullptr when the backend is not compiled in or not supported by the CPU.
const KernelTable* table_for(Backend backend);

}  // namespace cartcredit::kernels
