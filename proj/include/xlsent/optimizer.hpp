#pragma once

#include <cstdint>

#include "xlsent/encoder.hpp"

namespace xlsent {

struct OptimizerHyper {
  double lr = 2e-5;
  double weight_decay = 0.01;
  double epsilon = 1e-8;
  double beta1 = 0.9;
  double beta2 = 0.999;
};

// Adam with decoupled weight decay. Bias correction folds into a per-step
// rate alpha_t = lr * sqrt(1 - beta2^t) / (1 - beta1^t); the decay term is
// applied to the weights directly, never through the moments.
class AdamW {
 public:
  AdamW(const EncoderParameters& params, OptimizerHyper hyper);

  void step(EncoderParameters& params, const EncoderParameters& grads);

  std::int64_t step_count() const { return step_count_; }
  const OptimizerHyper& hyper() const { return hyper_; }

 private:
  OptimizerHyper hyper_;
  EncoderParameters m_;
  EncoderParameters v_;
  std::int64_t step_count_ = 0;
};

}  // namespace xlsent
