#include <numeric>

#include "cartcredit/cart.hpp"
#include "cartcredit/error.hpp"

namespace cartcredit::cart {
namespace {

__extension__ typedef __int128 i128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

void require_nonempty(const ClassDistribution& dist) {
  if (dist.total() == 0) throw Error(ErrorKind::EmptyDistribution, "distribution has no rows");
}

}  // namespace

double gini(const ClassDistribution& dist) {
  require_nonempty(dist);
  const double p0 = dist.proportion(0);
  const double p1 = dist.proportion(1);
  return 1.0 - p0 * p0 - p1 * p1;
}

double gini_complement_form(const ClassDistribution& dist) {
  require_nonempty(dist);
  const double p0 = dist.proportion(0);
  const double p1 = dist.proportion(1);
  return p0 * (1.0 - p0) + p1 * (1.0 - p1);
}

double split_gini(const ClassDistribution& left, const ClassDistribution& right) {
  require_nonempty(left);
  require_nonempty(right);
  const auto nl = static_cast<double>(left.total());
  const auto nr = static_cast<double>(right.total());
  return (nl * gini(left) + nr * gini(right)) / (nl + nr);
}

ExactDecrease exact_decrease(const ClassDistribution& left, const ClassDistribution& right) {
  require_nonempty(left);
  require_nonempty(right);
  const i128 a1 = static_cast<i128>(left.counts[0]);
  const i128 b1 = static_cast<i128>(left.counts[1]);
  const i128 a2 = static_cast<i128>(right.counts[0]);
  const i128 b2 = static_cast<i128>(right.counts[1]);
  const i128 nl = a1 + b1;
  const i128 nr = a2 + b2;
  const i128 n = nl + nr;
  const i128 a = a1 + a2;
  const i128 b = b1 + b2;
  // gini(parent) - split_gini = [S_L n n_R + S_R n n_L - S n_L n_R] / (n² n_L n_R)
  // with S = sum of squared class counts.
  const i128 sl = a1 * a1 + b1 * b1;
  const i128 sr = a2 * a2 + b2 * b2;
  const i128 s = a * a + b * b;
  i128 num = sl * n * nr + sr * n * nl - s * nl * nr;
  i128 den = n * n * nl * nr;
  const i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  return {static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

bool operator<(const ExactDecrease& a, const ExactDecrease& b) {
  return static_cast<i128>(a.numerator) * b.denominator <
         static_cast<i128>(b.numerator) * a.denominator;
}

bool operator==(const ExactDecrease& a, const ExactDecrease& b) {
  return static_cast<i128>(a.numerator) * b.denominator ==
         static_cast<i128>(b.numerator) * a.denominator;
}

Leaf assign_leaf(const ClassDistribution& dist) {
  require_nonempty(dist);
  Leaf leaf;
  leaf.predicted_class = dist.counts[1] > dist.counts[0] ? 1 : 0;
  leaf.positive_proportion = dist.proportion(1);
  return leaf;
}

Leaf assign_leaf(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyDistribution, "no values");
  Leaf leaf;
  leaf.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  leaf.positive_proportion = leaf.mean;
  return leaf;
}

}  // namespace cartcredit::cart
