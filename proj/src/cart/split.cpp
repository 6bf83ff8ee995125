#include <algorithm>
#include <cmath>
#include <map>

#include "cartcredit/cart.hpp"
#include "cartcredit/error.hpp"

namespace cartcredit::cart {
namespace {

__extension__ typedef __int128 i128;

// Partitions with more codes than this are refused (2^(m-1) - 1 candidates).
constexpr std::size_t kMaxCategoricalCodes = 20;

// Classification split quality: S_L / n_L + S_R / n_R with S the sum of
// squared class counts, kept as an exact fraction. Larger is better and
// ranks candidates exactly like the Gini decrease.
struct ClassScore {
  i128 num = 0;
  i128 den = 1;
};

int compare(const ClassScore& a, const ClassScore& b) {
  const i128 lhs = a.num * b.den;
  const i128 rhs = b.num * a.den;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

ClassScore class_score(const ClassDistribution& l, const ClassDistribution& r) {
  const i128 nl = static_cast<i128>(l.total());
  const i128 nr = static_cast<i128>(r.total());
  const i128 sl = static_cast<i128>(l.counts[0]) * static_cast<i128>(l.counts[0]) +
                  static_cast<i128>(l.counts[1]) * static_cast<i128>(l.counts[1]);
  const i128 sr = static_cast<i128>(r.counts[0]) * static_cast<i128>(r.counts[0]) +
                  static_cast<i128>(r.counts[1]) * static_cast<i128>(r.counts[1]);
  return {sl * nr + sr * nl, nl * nr};
}

struct Moments {
  std::size_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double y) {
    ++n;
    sum += y;
    sumsq += y * y;
  }
  Moments minus(const Moments& o) const { return {n - o.n, sum - o.sum, sumsq - o.sumsq}; }
  double sse() const { return n == 0 ? 0.0 : std::max(0.0, sumsq - sum * sum / static_cast<double>(n)); }
};

int to_class(double y) {
  if (y == 0.0) return 0;
  if (y == 1.0) return 1;
  throw Error(ErrorKind::DomainError, "classification target must be 0/1");
}

// Running best candidate; replacement only on a strictly better score so the
// scan order implements the tie-break (feature index, then threshold).
struct Best {
  bool found = false;
  ClassScore class_score;
  double regression_score = 0.0;  // -(SSE_L + SSE_R)
  SplitRule rule;
  ClassDistribution left;
  ClassDistribution right;
};

bool lexicographically_smaller(const SplitRule& a, const SplitRule& b) {
  const auto* sa = std::get_if<CategoricalSubset>(&a.test);
  const auto* sb = std::get_if<CategoricalSubset>(&b.test);
  return sa && sb && a.feature == b.feature && sa->codes < sb->codes;
}

// Returns >0 if the candidate beats `best`, 0 on a tie, <0 otherwise.
int rank_candidate(const Best& best, Mode mode, const ClassScore& cs, double rs) {
  if (!best.found) return 1;
  if (mode == Mode::Classification) return compare(cs, best.class_score);
  return rs > best.regression_score ? 1 : (rs < best.regression_score ? -1 : 0);
}

void offer(Best& best, Mode mode, SplitRule rule, const ClassDistribution& l,
           const ClassDistribution& r, const Moments& ml, const Moments& mr) {
  ClassScore cs;
  double rs = 0.0;
  if (mode == Mode::Classification) {
    cs = class_score(l, r);
  } else {
    rs = -(ml.sse() + mr.sse());
  }
  const int rank = rank_candidate(best, mode, cs, rs);
  if (rank > 0 || (rank == 0 && lexicographically_smaller(rule, best.rule))) {
    best.found = true;
    best.class_score = cs;
    best.regression_score = rs;
    best.rule = std::move(rule);
    best.left = l;
    best.right = r;
  }
}

void scan_numeric(const NodeData& node, std::size_t feature, const std::string& name, Mode mode,
                  Best& best) {
  const auto& column = node.columns[feature];
  std::vector<std::size_t> order(node.rows.begin(), node.rows.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });

  ClassDistribution total;
  Moments total_m;
  for (std::size_t r : order) {
    if (mode == Mode::Classification) ++total.counts[static_cast<std::size_t>(to_class(node.target[r]))];
    else total_m.add(node.target[r]);
  }

  ClassDistribution left;
  Moments left_m;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const double y = node.target[order[i]];
    if (mode == Mode::Classification) ++left.counts[static_cast<std::size_t>(to_class(y))];
    else left_m.add(y);
    const double lo = column[order[i]];
    const double hi = column[order[i + 1]];
    if (!(lo < hi)) continue;
    double threshold = lo + (hi - lo) / 2.0;
    // Adjacent doubles: the midpoint may round up to `hi`.
    if (!(threshold < hi)) threshold = lo;
    ClassDistribution right;
    right.counts = {total.counts[0] - left.counts[0], total.counts[1] - left.counts[1]};
    offer(best, mode, SplitRule{feature, name, NumericThreshold{threshold}}, left, right, left_m,
          total_m.minus(left_m));
  }
}

void scan_categorical(const NodeData& node, std::size_t feature, const std::string& name, Mode mode,
                      Best& best) {
  const auto& column = node.columns[feature];
  std::map<std::int64_t, std::pair<ClassDistribution, Moments>> by_code;
  for (std::size_t r : node.rows) {
    auto& [dist, m] = by_code[static_cast<std::int64_t>(column[r])];
    if (mode == Mode::Classification) ++dist.counts[static_cast<std::size_t>(to_class(node.target[r]))];
    else m.add(node.target[r]);
  }
  const std::size_t m = by_code.size();
  if (m < 2) return;
  if (m > kMaxCategoricalCodes) {
    throw Error(ErrorKind::DomainError, "feature " + name + " has " + std::to_string(m) +
                                            " codes at one node; at most " +
                                            std::to_string(kMaxCategoricalCodes) + " supported");
  }
  std::vector<std::int64_t> codes;
  std::vector<std::pair<ClassDistribution, Moments>> stats;
  for (const auto& [code, s] : by_code) {
    codes.push_back(code);
    stats.push_back(s);
  }
  ClassDistribution total;
  Moments total_m;
  for (const auto& [d, mm] : stats) {
    total.counts[0] += d.counts[0];
    total.counts[1] += d.counts[1];
    total_m = {total_m.n + mm.n, total_m.sum + mm.sum, total_m.sumsq + mm.sumsq};
  }

  // The smallest code always sits in the left set; the remaining m - 1 codes
  // are chosen by `mask`, excluding the all-in mask.
  const std::uint64_t masks = (std::uint64_t{1} << (m - 1)) - 1;
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    CategoricalSubset subset;
    subset.codes.push_back(codes[0]);
    ClassDistribution left = stats[0].first;
    Moments left_m = stats[0].second;
    for (std::size_t k = 1; k < m; ++k) {
      if (mask & (std::uint64_t{1} << (k - 1))) {
        subset.codes.push_back(codes[k]);
        left.counts[0] += stats[k].first.counts[0];
        left.counts[1] += stats[k].first.counts[1];
        const Moments& add = stats[k].second;
        left_m = {left_m.n + add.n, left_m.sum + add.sum, left_m.sumsq + add.sumsq};
      }
    }
    ClassDistribution right;
    right.counts = {total.counts[0] - left.counts[0], total.counts[1] - left.counts[1]};
    offer(best, mode, SplitRule{feature, name, std::move(subset)}, left, right, left_m,
          total_m.minus(left_m));
  }
}

}  // namespace

std::size_t categorical_partition_count(std::size_t m) {
  if (m < 2) return 0;
  return (std::size_t{1} << (m - 1)) - 1;
}

bool SplitRule::goes_left(double value) const {
  if (const auto* t = std::get_if<NumericThreshold>(&test)) return value <= t->threshold;
  const auto& codes = std::get<CategoricalSubset>(test).codes;
  return std::binary_search(codes.begin(), codes.end(), static_cast<std::int64_t>(value));
}

std::optional<SplitCandidate> best_split(const NodeData& node,
                                         std::span<const dataset::FeatureSpec> features,
                                         const CartConfig& config) {
  if (node.rows.size() < 2) return std::nullopt;
  if (features.size() != node.columns.size()) {
    throw Error(ErrorKind::SchemaMismatch, "one column per feature required");
  }

  // Impurity of the node itself; a pure node has nothing to gain.
  ClassDistribution parent;
  Moments parent_m;
  for (std::size_t r : node.rows) {
    if (config.mode == Mode::Classification) ++parent.counts[static_cast<std::size_t>(to_class(node.target[r]))];
    else parent_m.add(node.target[r]);
  }
  if (config.mode == Mode::Classification) {
    if (parent.counts[0] == 0 || parent.counts[1] == 0) return std::nullopt;
  } else if (!(parent_m.sse() > 0.0)) {
    return std::nullopt;
  }

  Best best;
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f].kind.is_numeric()) {
      scan_numeric(node, f, features[f].name, config.mode, best);
    } else {
      scan_categorical(node, f, features[f].name, config.mode, best);
    }
  }
  if (!best.found) return std::nullopt;

  SplitCandidate out;
  out.rule = best.rule;
  if (config.mode == Mode::Classification) {
    out.exact = exact_decrease(best.left, best.right);
    out.decrease = out.exact.value();
  } else {
    const double n = static_cast<double>(parent_m.n);
    out.decrease = parent_m.sse() / n + best.regression_score / n;
  }
  if (out.decrease < config.min_gini_decrease) return std::nullopt;
  return out;
}

}  // namespace cartcredit::cart
