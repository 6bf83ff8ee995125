#include "cartcredit/error.hpp"
#include "cartcredit/eval.hpp"

namespace cartcredit::eval {

ConfusionMatrix confusion(std::span<const LabelPair> pairs) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyInput, "no predictions to tabulate");
  ConfusionMatrix cm;
  for (const auto& [actual, predicted] : pairs) {
    if ((actual != 0 && actual != 1) || (predicted != 0 && predicted != 1)) {
      throw Error(ErrorKind::DomainError, "labels must be 0 or 1");
    }
    if (actual == 1) {
      ++(predicted == 1 ? cm.vp : cm.fn);
    } else {
      ++(predicted == 0 ? cm.vn : cm.fp);
    }
  }
  return cm;
}

namespace {

void require_both_classes(const ConfusionMatrix& cm) {
  if (cm.positives() == 0 || cm.negatives() == 0) {
    throw Error(ErrorKind::DegenerateClass, "both actual classes must be present");
  }
}

double ratio(std::size_t num, std::size_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ErrorRates error_rates(const ConfusionMatrix& cm) {
  require_both_classes(cm);
  return {ratio(cm.fn, cm.positives()), ratio(cm.fp, cm.negatives()),
          ratio(cm.fn + cm.fp, cm.total())};
}

Metrics metrics(const ConfusionMatrix& cm) {
  require_both_classes(cm);
  return {ratio(cm.vp + cm.vn, cm.total()), ratio(cm.vp, cm.positives()),
          ratio(cm.vn, cm.negatives())};
}

}  // namespace cartcredit::eval
