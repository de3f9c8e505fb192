#ifndef FLOWTIE_NN_OPTIMIZER_HPP
#define FLOWTIE_NN_OPTIMIZER_HPP

#include <cstdint>
#include <vector>

#include "flowtie/nn/tensor.hpp"

namespace flowtie::nn {

// AdamW: Adam with decoupled weight decay and bias correction.
struct AdamW {
  double lr = 1e-4;
  double beta1 = 0.9, beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::int64_t step_count = 0;

  std::vector<std::vector<double>> m, v;  // one moment pair per parameter

  // Returns false (and leaves parameters untouched) on non-finite gradients.
  bool step(const std::vector<Tensor*>& params);
};

}  // namespace flowtie::nn

#endif
