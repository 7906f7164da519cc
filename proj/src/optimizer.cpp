#include "xlsent/optimizer.hpp"

#include <cmath>

#include "xlsent/errors.hpp"

namespace xlsent {

AdamW::AdamW(const EncoderParameters& params, OptimizerHyper hyper)
    : hyper_(hyper), m_(zeros_like(params)), v_(zeros_like(params)) {}

void AdamW::step(EncoderParameters& params, const EncoderParameters& grads) {
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double alpha_t =
      hyper_.lr * std::sqrt(1.0 - std::pow(hyper_.beta2, t)) / (1.0 - std::pow(hyper_.beta1, t));
  const double decay = hyper_.lr * hyper_.weight_decay;

  struct Cursor {
    Matrix* m;
    Matrix* v;
    const Matrix* g;
  };
  std::vector<std::pair<std::string, Cursor>> slots;
  m_.for_each_tensor([&](const std::string& name, Matrix& m) { slots.push_back({name, {&m, nullptr, nullptr}}); });
  std::size_t i = 0;
  v_.for_each_tensor([&](const std::string&, Matrix& v) { slots[i++].second.v = &v; });
  i = 0;
  grads.for_each_tensor([&](const std::string&, const Matrix& g) {
    slots[i++].second.g = const_cast<Matrix*>(&g);
  });

  i = 0;
  params.for_each_tensor([&](const std::string& name, Matrix& w) {
    const Cursor& slot = slots[i].second;
    if (slots[i].first != name || !w.same_shape(*slot.g)) {
      throw NumericalError("optimizer_step: shape mismatch on tensor " + name);
    }
    ++i;
    auto& wd = w.data();
    auto& md = slot.m->data();
    auto& vd = slot.v->data();
    const auto& gd = slot.g->data();
    for (std::size_t j = 0; j < wd.size(); ++j) {
      const double g = gd[j];
      if (!std::isfinite(g)) throw NumericalError("optimizer_step: non-finite gradient in tensor " + name);
      md[j] = hyper_.beta1 * md[j] + (1.0 - hyper_.beta1) * g;
      vd[j] = hyper_.beta2 * vd[j] + (1.0 - hyper_.beta2) * g * g;
      wd[j] -= alpha_t * md[j] / (std::sqrt(vd[j]) + hyper_.epsilon) + decay * wd[j];
    }
  });
}

}  // namespace xlsent
