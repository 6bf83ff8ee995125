#include <cmath>
#include <set>

#include "json.hpp"

#include "cartcredit/screening.hpp"

namespace cartcredit::screening {

std::vector<std::string> significant_variables(const std::vector<WaldRow>& wald, double alpha) {
  std::vector<std::string> out;
  for (const auto& row : wald) {
    if (!row.intercept && !(row.sig > alpha)) out.push_back(row.variable);
  }
  return out;
}

ScreeningOutcome screen(const std::vector<WaldRow>& wald, const CorrelationMatrix& corr,
                        const ScreenOptions& options) {
  ScreeningOutcome outcome;
  std::vector<std::string> survivors;
  for (const auto& row : wald) {
    if (row.intercept) continue;
    if (row.sig > options.alpha) {
      Dropped d;
      d.variable = row.variable;
      d.reason = Dropped::Reason::NotSignificant;
      d.sig = row.sig;
      outcome.dropped.push_back(std::move(d));
    } else {
      survivors.push_back(row.variable);
    }
  }

  std::set<std::size_t> removed;
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    if (removed.contains(i)) continue;
    for (std::size_t j = i + 1; j < survivors.size(); ++j) {
      if (removed.contains(j)) continue;
      const double r = corr.at(survivors[i], survivors[j]);
      if (std::abs(r) >= options.r_threshold) {
        removed.insert(j);
        Dropped d;
        d.variable = survivors[j];
        d.reason = Dropped::Reason::Correlated;
        d.partner = survivors[i];
        d.r = r;
        outcome.dropped.push_back(std::move(d));
      }
    }
  }
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    if (!removed.contains(i)) outcome.kept.push_back(survivors[i]);
  }
  return outcome;
}

std::string format_outcome_json(const ScreeningOutcome& outcome) {
  nlohmann::ordered_json doc;
  doc["kept"] = outcome.kept;
  doc["dropped"] = nlohmann::ordered_json::array();
  for (const auto& d : outcome.dropped) {
    nlohmann::ordered_json entry;
    entry["variable"] = d.variable;
    if (d.reason == Dropped::Reason::NotSignificant) {
      entry["reason"] = "NotSignificant";
      entry["sig"] = d.sig;
    } else {
      entry["reason"] = "Correlated";
      entry["partner"] = d.partner;
      entry["r"] = d.r;
    }
    doc["dropped"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

}  // namespace cartcredit::screening
