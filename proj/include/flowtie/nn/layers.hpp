#ifndef FLOWTIE_NN_LAYERS_HPP
#define FLOWTIE_NN_LAYERS_HPP

#include "flowtie/nn/tensor.hpp"

namespace flowtie::nn {

// 2D convolution, stride 1, zero padding k/2 so H x W is preserved.
// Odd square kernels only. Implemented as im2col + GEMM.
struct Conv2d {
  int c_in = 0, c_out = 0, k = 3;
  Tensor w;  // (c_out, c_in, k, k)
  Tensor b;  // (c_out)

  Conv2d() = default;
  Conv2d(int cin, int cout, int kernel);

  Tensor forward(const Tensor& x);   // x: (B, c_in, H, W)
  Tensor backward(const Tensor& gy); // accumulates w.grad/b.grad, returns gx

 private:
  std::vector<std::vector<double>> col_cache_;  // one im2col matrix per batch item
  std::vector<int> x_shape_;
};

// Per-channel batch normalization over (B, H, W). Train mode uses batch
// statistics and updates running estimates; eval mode uses running statistics.
struct BatchNorm2d {
  int c = 0;
  double eps = 1e-5;
  double momentum = 0.1;
  Tensor gamma, beta;            // (C)
  Tensor running_mean, running_var;  // (C) buffers

  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& gy);

 private:
  bool train_cached_ = false;
  std::vector<double> xhat_, invstd_;
  std::vector<int> x_shape_;
};

// GELU, tanh approximation.
struct Gelu {
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);

 private:
  Tensor x_cache_;
};

double gelu_scalar(double x);
double gelu_grad_scalar(double x);

}  // namespace flowtie::nn

#endif
