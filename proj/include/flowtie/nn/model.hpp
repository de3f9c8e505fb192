#ifndef FLOWTIE_NN_MODEL_HPP
#define FLOWTIE_NN_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowtie/nn/layers.hpp"

namespace flowtie::nn {

// 4-layer convolutional encoder-decoder predicting a 2D flow per input
// channel: conv->BN->GELU x3, then a linear conv to 2*C_in channels.
// Input (B, C, H, W), output (B, 2, C, H, W).
struct FlowModel {
  int c_in = 0, depth = 32, kernel = 3;
  bool train_mode = false;

  Conv2d conv1, conv2, conv3, conv4;
  BatchNorm2d bn1, bn2, bn3;
  Gelu act1, act2, act3;

  // Standardization statistics of the training corpus inputs (recorded for
  // provenance; inputs are standardized per sample at run time).
  double input_mean = 0.0, input_std = 1.0;

  FlowModel() = default;
  FlowModel(int c_in_, int depth_, int kernel_);

  void init_params(std::uint64_t seed);

  Tensor forward(const Tensor& x);           // (B, C, H, W) -> (B, 2, C, H, W)
  Tensor backward(const Tensor& gy);         // grad w.r.t. the (B,2,C,H,W) output

  std::vector<Tensor*> parameters();
  std::vector<Tensor*> buffers();            // batchnorm running statistics
  static std::vector<std::string> parameter_names();
  static std::vector<std::string> buffer_names();
  void zero_grad();
};

// Standardize each sample of x (mean 0, variance 1 over C*H*W).
Tensor standardize_per_sample(const Tensor& x);

void save_model(const FlowModel& m, const std::string& dir);

}  // namespace flowtie::nn

#endif
