#ifndef FLOWTIE_NN_TENSOR_HPP
#define FLOWTIE_NN_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace flowtie::nn {

// Dense f64 tensor with an optional gradient buffer of identical shape.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel(), 0.0);
  }

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
      n *= std::size_t(d);
    }
    return n;
  }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
  void zero_grad() {
    grad.assign(data.size(), 0.0);
  }

  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Tensor reshaped(std::vector<int> s) const {
    Tensor t = *this;
    t.shape = std::move(s);
    if (t.numel() != data.size()) throw std::invalid_argument("Tensor: reshape size mismatch");
    return t;
  }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape != b.shape) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace flowtie::nn

#endif
