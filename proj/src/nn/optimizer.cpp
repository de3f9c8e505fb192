#include "flowtie/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace flowtie::nn {

bool AdamW::step(const std::vector<Tensor*>& params) {
  if (m.empty()) {
    m.resize(params.size());
    v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i].assign(params[i]->data.size(), 0.0);
      v[i].assign(params[i]->data.size(), 0.0);
    }
  }
  if (m.size() != params.size()) throw std::invalid_argument("AdamW: parameter count changed");

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor* p = params[i];
    if (p->grad.size() != p->data.size())
      throw std::invalid_argument("AdamW: missing gradient buffer");
    if (m[i].size() != p->data.size()) throw std::invalid_argument("AdamW: moment shape mismatch");
    for (double g : p->grad)
      if (!std::isfinite(g)) return false;  // step rejected
  }

  ++step_count;
  double bc1 = 1.0 - std::pow(beta1, double(step_count));
  double bc2 = 1.0 - std::pow(beta2, double(step_count));

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor* p = params[i];
    for (std::size_t j = 0; j < p->data.size(); ++j) {
      double g = p->grad[j];
      m[i][j] = beta1 * m[i][j] + (1.0 - beta1) * g;
      v[i][j] = beta2 * v[i][j] + (1.0 - beta2) * g * g;
      double mhat = m[i][j] / bc1;
      double vhat = v[i][j] / bc2;
      p->data[j] -= lr * weight_decay * p->data[j];
      p->data[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
  return true;
}

}  // namespace flowtie::nn
