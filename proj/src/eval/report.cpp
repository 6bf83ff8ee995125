#include <cstdio>
#include <sstream>

#include "cartcredit/csv.hpp"
#include "cartcredit/error.hpp"
#include "cartcredit/eval.hpp"
#include "json.hpp"

namespace cartcredit::eval {
namespace {

std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string percent(std::size_t num, std::size_t den) {
  if (den == 0) return "-";
  return fixed(100.0 * static_cast<double>(num) / static_cast<double>(den), 1) + "%";
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

EvaluationReport evaluate(std::span<const LabelPair> labels, std::span<const ScoredLabel> scores,
                          std::string score_mode) {
  EvaluationReport report;
  report.score_mode = std::move(score_mode);
  if (labels.empty()) return report;
  report.confusion = confusion(labels);
  const ConfusionMatrix& cm = *report.confusion;
  if (cm.positives() > 0 && cm.negatives() > 0) {
    report.rates = error_rates(cm);
    report.metrics = metrics(cm);
    report.roc = roc(scores);
  }
  return report;
}

std::string report_document(const EvaluationReport& report) {
  using nlohmann::ordered_json;
  ordered_json doc;
  auto count = [&](auto member) -> ordered_json {
    if (!report.confusion) return nullptr;
    return (*report.confusion).*member;
  };
  doc["vp"] = count(&ConfusionMatrix::vp);
  doc["vn"] = count(&ConfusionMatrix::vn);
  doc["fp"] = count(&ConfusionMatrix::fp);
  doc["fn"] = count(&ConfusionMatrix::fn);
  auto opt = [](bool have, double v) -> ordered_json { return have ? ordered_json(v) : ordered_json(nullptr); };
  const bool r = report.rates.has_value();
  doc["e1"] = opt(r, r ? report.rates->e1 : 0.0);
  doc["e2"] = opt(r, r ? report.rates->e2 : 0.0);
  doc["e3"] = opt(r, r ? report.rates->e3 : 0.0);
  const bool m = report.metrics.has_value();
  doc["accuracy"] = opt(m, m ? report.metrics->accuracy : 0.0);
  doc["sensitivity"] = opt(m, m ? report.metrics->sensitivity : 0.0);
  doc["specificity"] = opt(m, m ? report.metrics->specificity : 0.0);
  const bool c = report.roc.has_value();
  doc["auc"] = opt(c, c ? report.roc->auc : 0.0);
  doc["auc_se"] = opt(c, c ? report.roc->interval.se : 0.0);
  doc["auc_ci_low"] = opt(c, c ? report.roc->interval.low : 0.0);
  doc["auc_ci_high"] = opt(c, c ? report.roc->interval.high : 0.0);
  doc["n"] = report.confusion ? ordered_json(report.confusion->total()) : ordered_json(nullptr);
  doc["score_mode"] = report.score_mode;
  doc["roc_available"] = c;
  return doc.dump(2) + "\n";
}

std::string report_table(const EvaluationReport& report) {
  std::ostringstream out;
  if (!report.confusion) {
    out << "No rows evaluated.\n";
    return out.str();
  }
  const ConfusionMatrix& cm = *report.confusion;
  const std::size_t pred0 = cm.vn + cm.fn;
  const std::size_t pred1 = cm.fp + cm.vp;
  out << "Classification (positive class = 1)\n";
  out << pad("observed", 16) << pad("predicted 0", 14) << pad("predicted 1", 14) << pad("% correct", 12) << '\n';
  out << pad("0", 16) << pad(std::to_string(cm.vn), 14) << pad(std::to_string(cm.fp), 14)
      << pad(percent(cm.vn, cm.negatives()), 12) << '\n';
  out << pad("1", 16) << pad(std::to_string(cm.fn), 14) << pad(std::to_string(cm.vp), 14)
      << pad(percent(cm.vp, cm.positives()), 12) << '\n';
  out << pad("overall %", 16) << pad(percent(pred0, cm.total()), 14) << pad(percent(pred1, cm.total()), 14)
      << pad(percent(cm.vp + cm.vn, cm.total()), 12) << '\n';
  out << "VP = " << cm.vp << "  VN = " << cm.vn << "  FP = " << cm.fp << "  FN = " << cm.fn
      << "  N = " << cm.total() << "\n\n";

  if (report.rates) {
    out << "Error rates\n";
    out << pad("e1", 12) << pad("e2", 12) << pad("e3", 12) << '\n';
    out << pad(fixed(report.rates->e1, 8), 12) << pad(fixed(report.rates->e2, 8), 12)
        << pad(fixed(report.rates->e3, 8), 12) << "\n\n";
  } else {
    out << "Error rates: unavailable (one actual class is absent)\n\n";
  }
  if (report.metrics) {
    out << "Accuracy    = " << fixed(report.metrics->accuracy, 4) << '\n';
    out << "Sensitivity = " << fixed(report.metrics->sensitivity, 4) << '\n';
    out << "Specificity = " << fixed(report.metrics->specificity, 4) << "\n\n";
  }
  if (report.roc) {
    const RocCurve& roc = *report.roc;
    out << "ROC (" << report.score_mode << " scores, " << roc.points.size() << " points)\n";
    out << pad("AUC", 10) << pad("Std error", 12) << pad("CI95 low", 12) << pad("CI95 high", 12) << '\n';
    out << pad(fixed(roc.auc, 4), 10) << pad(fixed(roc.interval.se, 4), 12)
        << pad(fixed(roc.interval.low, 4), 12) << pad(fixed(roc.interval.high, 4), 12) << '\n';
  } else {
    out << "ROC: unavailable\n";
  }
  return out.str();
}

std::string roc_tsv(const RocCurve& curve) {
  std::ostringstream out;
  for (const auto& p : curve.points) {
    out << csv::format_double(p.fpr) << '\t' << csv::format_double(p.tpr) << '\n';
  }
  return out.str();
}

}  // namespace cartcredit::eval
