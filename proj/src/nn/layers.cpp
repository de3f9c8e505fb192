#include "flowtie/nn/layers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace flowtie::nn {

namespace {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void im2col(const double* x, int c, int h, int w, int k, std::vector<double>& col) {
  int pad = k / 2;
  std::size_t hw = std::size_t(h) * w;
  col.assign(std::size_t(c) * k * k * hw, 0.0);
  for (int ci = 0; ci < c; ++ci) {
    const double* xc = x + std::size_t(ci) * hw;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = col.data() + (std::size_t(ci) * k * k + std::size_t(ky) * k + kx) * hw;
        int dy = ky - pad, dx = kx - pad;
        int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        for (int y = y0; y < y1; ++y) {
          const double* src = xc + std::size_t(y + dy) * w + (x0 + dx);
          double* dst = row + std::size_t(y) * w + x0;
          for (int xx = x0; xx < x1; ++xx) *dst++ = *src++;
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& col, int c, int h, int w, int k, double* gx) {
  int pad = k / 2;
  std::size_t hw = std::size_t(h) * w;
  for (int ci = 0; ci < c; ++ci) {
    double* xc = gx + std::size_t(ci) * hw;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = col.data() + (std::size_t(ci) * k * k + std::size_t(ky) * k + kx) * hw;
        int dy = ky - pad, dx = kx - pad;
        int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        for (int y = y0; y < y1; ++y) {
          double* dst = xc + std::size_t(y + dy) * w + (x0 + dx);
          const double* src = row + std::size_t(y) * w + x0;
          for (int xx = x0; xx < x1; ++xx) *dst++ += *src++;
        }
      }
    }
  }
}

}  // namespace

Conv2d::Conv2d(int cin, int cout, int kernel) : c_in(cin), c_out(cout), k(kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("Conv2d: kernel must be odd");
  w = Tensor({cout, cin, kernel, kernel});
  b = Tensor({cout});
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.shape.size() != 4 || x.shape[1] != c_in)
    throw std::invalid_argument("Conv2d: expected (B, c_in, H, W) input");
  int bsz = x.shape[0], h = x.shape[2], wd = x.shape[3];
  if (h < k || wd < k) throw std::invalid_argument("Conv2d: spatial dims smaller than kernel");
  x_shape_ = x.shape;
  std::size_t hw = std::size_t(h) * wd;
  std::size_t chw = std::size_t(c_in) * hw;

  Tensor y({bsz, c_out, h, wd});
  col_cache_.assign(bsz, {});
  CMatMap wm(w.data.data(), c_out, std::size_t(c_in) * k * k);
  for (int bi = 0; bi < bsz; ++bi) {
    im2col(x.data.data() + bi * chw, c_in, h, wd, k, col_cache_[bi]);
    CMatMap col(col_cache_[bi].data(), std::size_t(c_in) * k * k, hw);
    MatMap out(y.data.data() + std::size_t(bi) * c_out * hw, c_out, hw);
    out.noalias() = wm * col;
    for (int co = 0; co < c_out; ++co) out.row(co).array() += b.data[co];
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
  int bsz = x_shape_[0], h = x_shape_[2], wd = x_shape_[3];
  std::size_t hw = std::size_t(h) * wd;
  w.ensure_grad();
  b.ensure_grad();

  Tensor gx(x_shape_);
  MatMap gwm(w.grad.data(), c_out, std::size_t(c_in) * k * k);
  CMatMap wm(w.data.data(), c_out, std::size_t(c_in) * k * k);
  std::vector<double> gcol;
  for (int bi = 0; bi < bsz; ++bi) {
    CMatMap gym(gy.data.data() + std::size_t(bi) * c_out * hw, c_out, hw);
    CMatMap col(col_cache_[bi].data(), std::size_t(c_in) * k * k, hw);
    gwm.noalias() += gym * col.transpose();
    for (int co = 0; co < c_out; ++co) b.grad[co] += gym.row(co).sum();
    gcol.assign(std::size_t(c_in) * k * k * hw, 0.0);
    MatMap gcolm(gcol.data(), std::size_t(c_in) * k * k, hw);
    gcolm.noalias() = wm.transpose() * gym;
    col2im_add(gcol, c_in, h, wd, k, gx.data.data() + std::size_t(bi) * c_in * hw);
  }
  return gx;
}

BatchNorm2d::BatchNorm2d(int channels) : c(channels) {
  gamma = Tensor({channels});
  beta = Tensor({channels});
  running_mean = Tensor({channels});
  running_var = Tensor({channels});
  std::fill(gamma.data.begin(), gamma.data.end(), 1.0);
  std::fill(running_var.data.begin(), running_var.data.end(), 1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
  if (x.shape.size() != 4 || x.shape[1] != c)
    throw std::invalid_argument("BatchNorm2d: expected (B, C, H, W) input");
  int bsz = x.shape[0], h = x.shape[2], wd = x.shape[3];
  std::size_t hw = std::size_t(h) * wd;
  std::size_t chw = std::size_t(c) * hw;
  double m = double(bsz) * double(hw);
  x_shape_ = x.shape;
  train_cached_ = train;

  Tensor y(x.shape);
  xhat_.assign(x.data.size(), 0.0);
  invstd_.assign(c, 0.0);

  for (int ci = 0; ci < c; ++ci) {
    double mu, var;
    if (train) {
      double s = 0.0, s2 = 0.0;
      for (int bi = 0; bi < bsz; ++bi) {
        const double* p = x.data.data() + bi * chw + ci * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          s += p[i];
          s2 += p[i] * p[i];
        }
      }
      mu = s / m;
      var = s2 / m - mu * mu;
      if (var < 0.0) var = 0.0;
      double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
      running_mean.data[ci] = (1.0 - momentum) * running_mean.data[ci] + momentum * mu;
      running_var.data[ci] = (1.0 - momentum) * running_var.data[ci] + momentum * unbiased;
    } else {
      mu = running_mean.data[ci];
      var = running_var.data[ci];
    }
    double inv = 1.0 / std::sqrt(var + eps);
    invstd_[ci] = inv;
    double g = gamma.data[ci], bt = beta.data[ci];
    for (int bi = 0; bi < bsz; ++bi) {
      const double* p = x.data.data() + bi * chw + ci * hw;
      double* xh = xhat_.data() + bi * chw + ci * hw;
      double* py = y.data.data() + bi * chw + ci * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        xh[i] = (p[i] - mu) * inv;
        py[i] = g * xh[i] + bt;
      }
    }
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& gy) {
  int bsz = x_shape_[0], h = x_shape_[2], wd = x_shape_[3];
  std::size_t hw = std::size_t(h) * wd;
  std::size_t chw = std::size_t(c) * hw;
  double m = double(bsz) * double(hw);
  gamma.ensure_grad();
  beta.ensure_grad();

  Tensor gx(x_shape_);
  for (int ci = 0; ci < c; ++ci) {
    double g = gamma.data[ci];
    double inv = invstd_[ci];
    double sum_gy = 0.0, sum_gy_xhat = 0.0;
    for (int bi = 0; bi < bsz; ++bi) {
      const double* py = gy.data.data() + bi * chw + ci * hw;
      const double* xh = xhat_.data() + bi * chw + ci * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_gy += py[i];
        sum_gy_xhat += py[i] * xh[i];
      }
    }
    gamma.grad[ci] += sum_gy_xhat;
    beta.grad[ci] += sum_gy;
    for (int bi = 0; bi < bsz; ++bi) {
      const double* py = gy.data.data() + bi * chw + ci * hw;
      const double* xh = xhat_.data() + bi * chw + ci * hw;
      double* px = gx.data.data() + bi * chw + ci * hw;
      if (train_cached_) {
        for (std::size_t i = 0; i < hw; ++i)
          px[i] = g * inv / m * (m * py[i] - sum_gy - xh[i] * sum_gy_xhat);
      } else {
        for (std::size_t i = 0; i < hw; ++i) px[i] = g * inv * py[i];
      }
    }
  }
  return gx;
}

double gelu_scalar(double x) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  double u = c * (x + 0.044715 * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad_scalar(double x) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  double u = c * (x + 0.044715 * x * x * x);
  double t = std::tanh(u);
  double du = c * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

Tensor Gelu::forward(const Tensor& x) {
  x_cache_ = x;
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] = gelu_scalar(x.data[i]);
  return y;
}

Tensor Gelu::backward(const Tensor& gy) {
  Tensor gx(x_cache_.shape);
  for (std::size_t i = 0; i < gx.data.size(); ++i)
    gx.data[i] = gy.data[i] * gelu_grad_scalar(x_cache_.data[i]);
  return gx;
}

}  // namespace flowtie::nn
