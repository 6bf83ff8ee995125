#include <algorithm>
#include <cmath>

#include "cartcredit/error.hpp"
#include "cartcredit/eval.hpp"

namespace cartcredit::eval {

AucInterval auc_se_ci(double auc, std::size_t n1, std::size_t n0) {
  if (!(auc > 0.0 && auc < 1.0) || n1 == 0 || n0 == 0) {
    throw Error(ErrorKind::DomainError, "Hanley-McNeil needs 0 < auc < 1 and both classes");
  }
  const double a2 = auc * auc;
  const double q1 = auc / (2.0 - auc);
  const double q2 = 2.0 * a2 / (1.0 + auc);
  const double d1 = static_cast<double>(n1);
  const double d0 = static_cast<double>(n0);
  const double var = (auc * (1.0 - auc) + (d1 - 1.0) * (q1 - a2) + (d0 - 1.0) * (q2 - a2)) / (d1 * d0);
  AucInterval out;
  out.se = std::sqrt(std::max(var, 0.0));
  out.low = std::clamp(auc - 1.96 * out.se, 0.0, 1.0);
  out.high = std::clamp(auc + 1.96 * out.se, 0.0, 1.0);
  return out;
}

RocCurve roc(std::span<const ScoredLabel> scored) {
  std::size_t n1 = 0;
  std::size_t n0 = 0;
  for (const auto& s : scored) {
    if (!(s.score >= 0.0 && s.score <= 1.0)) {
      throw Error(ErrorKind::ScoreOutOfRange, "score outside [0, 1]");
    }
    if (s.actual == 1) {
      ++n1;
    } else if (s.actual == 0) {
      ++n0;
    } else {
      throw Error(ErrorKind::DomainError, "labels must be 0 or 1");
    }
  }
  if (n1 == 0 || n0 == 0) throw Error(ErrorKind::DegenerateClass, "ROC needs both classes");

  std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  // Twice the area times n1 * n0, accumulated in integers.
  unsigned long long area2 = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const std::size_t prev_tp = tp;
    const std::size_t prev_fp = fp;
    const double threshold = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == threshold; ++i) {
      ++(sorted[i].actual == 1 ? tp : fp);
    }
    area2 += static_cast<unsigned long long>(fp - prev_fp) * (tp + prev_tp);
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n0),
                            static_cast<double>(tp) / static_cast<double>(n1)});
  }
  if (!(curve.points.back() == RocPoint{1.0, 1.0})) curve.points.push_back({1.0, 1.0});
  curve.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(n1) * static_cast<double>(n0));

  if (curve.auc > 0.0 && curve.auc < 1.0) {
    curve.interval = auc_se_ci(curve.auc, n1, n0);
  } else {
    curve.interval = {0.0, curve.auc, curve.auc};
  }
  return curve;
}

}  // namespace cartcredit::eval
