#include <algorithm>
#include <cmath>
#include <sstream>

#include "cartcredit/dataset.hpp"
#include "cartcredit/error.hpp"

namespace cartcredit::dataset {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::EmptyInput, "quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::string format_cleaning_log(const CleaningLog& log) {
  std::ostringstream out;
  for (const auto& entry : log) out << entry.row << '\t' << entry.reason << '\n';
  return out.str();
}

namespace {

struct Fences {
  double low;
  double high;
};

std::optional<Fences> fences_for(const Dataset& data, std::size_t feature,
                                 const std::vector<std::size_t>& rows, const OutlierRule& rule) {
  std::vector<double> values;
  values.reserve(rows.size());
  for (std::size_t r : rows) values.push_back(data.value(r, feature));
  if (values.empty()) return std::nullopt;
  if (rule.method == OutlierRule::Method::Iqr) {
    std::sort(values.begin(), values.end());
    const double q1 = quantile_sorted(values, 0.25);
    const double q3 = quantile_sorted(values, 0.75);
    const double iqr = q3 - q1;
    return Fences{q1 - rule.iqr_multiplier * iqr, q3 + rule.iqr_multiplier * iqr};
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size()));
  if (sd == 0.0) return std::nullopt;
  return Fences{mean - rule.z_threshold * sd, mean + rule.z_threshold * sd};
}

}  // namespace

CleanResult clean(const Dataset& data, const OutlierRule& rule) {
  CleaningLog log;
  std::vector<std::size_t> keep;
  keep.reserve(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::string reason;
    for (std::size_t c = 0; c < data.feature_count() && reason.empty(); ++c) {
      if (std::isnan(data.value(r, c))) reason = "missing:" + data.schema()[c].name;
    }
    if (reason.empty() && std::isnan(data.target()[r])) reason = "missing:" + data.target_name();
    if (reason.empty()) {
      keep.push_back(r);
    } else {
      log.push_back({r, std::move(reason)});
    }
  }

  if (rule.method != OutlierRule::Method::Off) {
    for (;;) {
      std::vector<std::string> reason(data.size());
      bool any = false;
      for (const auto& spec : data.schema()) {
        if (!spec.kind.is_numeric()) continue;
        const auto fences = fences_for(data, spec.index, keep, rule);
        if (!fences) continue;
        for (std::size_t r : keep) {
          const double v = data.value(r, spec.index);
          if ((v < fences->low || v > fences->high) && reason[r].empty()) {
            reason[r] = "outlier:" + spec.name;
            any = true;
          }
        }
      }
      if (!any) break;
      std::vector<std::size_t> next;
      for (std::size_t r : keep) {
        if (reason[r].empty()) {
          next.push_back(r);
        } else {
          log.push_back({r, std::move(reason[r])});
        }
      }
      keep = std::move(next);
    }
  }

  if (keep.empty()) throw Error(ErrorKind::EmptyResult, "cleaning dropped every row");
  std::stable_sort(log.begin(), log.end(),
                   [](const CleaningEntry& a, const CleaningEntry& b) { return a.row < b.row; });
  return {data.select(keep), std::move(log)};
}

}  // namespace cartcredit::dataset
