#include "flowtie/nn/model.hpp"

#include <cmath>
#include <random>

namespace flowtie::nn {

FlowModel::FlowModel(int c_in_, int depth_, int kernel_)
    : c_in(c_in_),
      depth(depth_),
      kernel(kernel_),
      conv1(c_in_, depth_, kernel_),
      conv2(depth_, depth_, kernel_),
      conv3(depth_, depth_, kernel_),
      conv4(depth_, 2 * c_in_, kernel_),
      bn1(depth_),
      bn2(depth_),
      bn3(depth_) {}

void FlowModel::init_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto he_fill = [&rng](Tensor& w, int fan_in) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(fan_in)));
    for (double& v : w.data) v = dist(rng);
  };
  he_fill(conv1.w, c_in * kernel * kernel);
  he_fill(conv2.w, depth * kernel * kernel);
  he_fill(conv3.w, depth * kernel * kernel);
  he_fill(conv4.w, depth * kernel * kernel);
  std::fill(conv1.b.data.begin(), conv1.b.data.end(), 0.0);
  std::fill(conv2.b.data.begin(), conv2.b.data.end(), 0.0);
  std::fill(conv3.b.data.begin(), conv3.b.data.end(), 0.0);
  std::fill(conv4.b.data.begin(), conv4.b.data.end(), 0.0);
}

Tensor standardize_per_sample(const Tensor& x) {
  if (x.shape.size() != 4) throw std::invalid_argument("standardize: expected (B, C, H, W)");
  Tensor y = x;
  std::size_t per = x.numel() / std::size_t(x.shape[0]);
  for (int bi = 0; bi < x.shape[0]; ++bi) {
    double* p = y.data.data() + std::size_t(bi) * per;
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) s += p[i];
    double mu = s / double(per);
    double s2 = 0.0;
    for (std::size_t i = 0; i < per; ++i) s2 += (p[i] - mu) * (p[i] - mu);
    double sd = std::sqrt(s2 / double(per));
    double inv = 1.0 / (sd + 1e-12);
    for (std::size_t i = 0; i < per; ++i) p[i] = (p[i] - mu) * inv;
  }
  return y;
}

Tensor FlowModel::forward(const Tensor& x) {
  if (x.shape.size() != 4 || x.shape[1] != c_in)
    throw std::invalid_argument("FlowModel: expected (B, c_in, H, W) input");
  if (!x.finite()) throw std::runtime_error("FlowModel: non-finite input");
  Tensor h = standardize_per_sample(x);
  h = conv1.forward(h);
  h = bn1.forward(h, train_mode);
  h = act1.forward(h);
  h = conv2.forward(h);
  h = bn2.forward(h, train_mode);
  h = act2.forward(h);
  h = conv3.forward(h);
  h = bn3.forward(h, train_mode);
  h = act3.forward(h);
  h = conv4.forward(h);
  return h.reshaped({x.shape[0], 2, c_in, x.shape[2], x.shape[3]});
}

Tensor FlowModel::backward(const Tensor& gy) {
  if (gy.shape.size() != 5) throw std::invalid_argument("FlowModel: expected (B,2,C,H,W) grad");
  Tensor g = gy.reshaped({gy.shape[0], 2 * c_in, gy.shape[3], gy.shape[4]});
  g = conv4.backward(g);
  g = act3.backward(g);
  g = bn3.backward(g);
  g = conv3.backward(g);
  g = act2.backward(g);
  g = bn2.backward(g);
  g = conv2.backward(g);
  g = act1.backward(g);
  g = bn1.backward(g);
  g = conv1.backward(g);
  return g;
}

std::vector<Tensor*> FlowModel::parameters() {
  return {&conv1.w, &conv1.b, &bn1.gamma, &bn1.beta,  &conv2.w, &conv2.b, &bn2.gamma,
          &bn2.beta, &conv3.w, &conv3.b,  &bn3.gamma, &bn3.beta, &conv4.w, &conv4.b};
}

std::vector<Tensor*> FlowModel::buffers() {
  return {&bn1.running_mean, &bn1.running_var, &bn2.running_mean,
          &bn2.running_var,  &bn3.running_mean, &bn3.running_var};
}

std::vector<std::string> FlowModel::parameter_names() {
  return {"conv1_w", "conv1_b", "bn1_gamma", "bn1_beta",  "conv2_w", "conv2_b", "bn2_gamma",
          "bn2_beta", "conv3_w", "conv3_b",  "bn3_gamma", "bn3_beta", "conv4_w", "conv4_b"};
}

std::vector<std::string> FlowModel::buffer_names() {
  return {"bn1_rmean", "bn1_rvar", "bn2_rmean", "bn2_rvar", "bn3_rmean", "bn3_rvar"};
}

void FlowModel::zero_grad() {
  for (Tensor* t : parameters()) t->zero_grad();
}

}  // namespace flowtie::nn
