#include "flowtie/nn/losses.hpp"

#include <numbers>

#include "flowtie/recon.hpp"

namespace flowtie::nn {

namespace {

void check_v_shape(const Tensor& v) {
  if (v.shape.size() != 5 || v.shape[1] != 2)
    throw std::invalid_argument("loss: v_pred must be (B, 2, C, H, W)");
}

// periodic central difference along x (fast axis)
void diff_x(const double* u, int h, int w, double inv2h, double* out) {
  for (int y = 0; y < h; ++y) {
    const double* row = u + std::size_t(y) * w;
    double* orow = out + std::size_t(y) * w;
    for (int x = 0; x < w; ++x)
      orow[x] = (row[(x + 1) % w] - row[(x - 1 + w) % w]) * inv2h;
  }
}

void diff_y(const double* u, int h, int w, double inv2h, double* out) {
  for (int y = 0; y < h; ++y) {
    const double* up = u + std::size_t((y + 1) % h) * w;
    const double* dn = u + std::size_t((y - 1 + h) % h) * w;
    double* orow = out + std::size_t(y) * w;
    for (int x = 0; x < w; ++x) orow[x] = (up[x] - dn[x]) * inv2h;
  }
}

}  // namespace

LossValue loss_vf(const Tensor& v_pred, const Tensor& v_gt) {
  check_v_shape(v_pred);
  require_same_shape(v_pred, v_gt, "loss_vf");
  LossValue out;
  out.grad = Tensor(v_pred.shape);
  double n = double(v_pred.numel());
  double s = 0.0;
  for (std::size_t i = 0; i < v_pred.data.size(); ++i) {
    double d = v_pred.data[i] - v_gt.data[i];
    s += d * d;
    out.grad.data[i] = 2.0 * d / n;
  }
  out.value = s / n;
  return out;
}

LossValue loss_cont(const Tensor& i_deriv, const Tensor& i_zero, const Tensor& v_pred,
                    double lambda, double step_x, double step_y) {
  check_v_shape(v_pred);
  if (i_deriv.shape.size() != 4) throw std::invalid_argument("loss_cont: i_deriv must be 4D");
  require_same_shape(i_deriv, i_zero, "loss_cont");
  if (v_pred.shape[0] != i_deriv.shape[0] || v_pred.shape[2] != i_deriv.shape[1] ||
      v_pred.shape[3] != i_deriv.shape[2] || v_pred.shape[4] != i_deriv.shape[3])
    throw std::invalid_argument("loss_cont: v_pred/i_deriv shape mismatch");
  if (!(step_x > 0.0) || !(step_y > 0.0))
    throw std::invalid_argument("loss_cont: scan steps must be > 0");

  const int bsz = i_deriv.shape[0], c = i_deriv.shape[1], h = i_deriv.shape[2],
            w = i_deriv.shape[3];
  const std::size_t hw = std::size_t(h) * w;
  const double coeff = lambda / (2.0 * std::numbers::pi);
  const double inv2hx = 1.0 / (2.0 * step_x), inv2hy = 1.0 / (2.0 * step_y);
  const double n = double(i_deriv.numel());

  LossValue out;
  out.grad = Tensor(v_pred.shape);
  std::vector<double> flux(hw), d1(hw), d2(hw), resid(hw), tmp(hw);

  double s = 0.0;
  for (int bi = 0; bi < bsz; ++bi) {
    for (int ci = 0; ci < c; ++ci) {
      std::size_t base4 = (std::size_t(bi) * c + ci) * hw;
      std::size_t base_vx = ((std::size_t(bi) * 2 + 0) * c + ci) * hw;
      std::size_t base_vy = ((std::size_t(bi) * 2 + 1) * c + ci) * hw;

      for (std::size_t i = 0; i < hw; ++i) flux[i] = i_zero.data[base4 + i] * v_pred.data[base_vx + i];
      diff_x(flux.data(), h, w, inv2hx, d1.data());
      for (std::size_t i = 0; i < hw; ++i) flux[i] = i_zero.data[base4 + i] * v_pred.data[base_vy + i];
      diff_y(flux.data(), h, w, inv2hy, d2.data());

      for (std::size_t i = 0; i < hw; ++i) {
        resid[i] = i_deriv.data[base4 + i] + coeff * (d1[i] + d2[i]);
        s += resid[i] * resid[i];
      }
      // adjoint of the central difference is its negation
      for (std::size_t i = 0; i < hw; ++i) tmp[i] = 2.0 * resid[i] / n * coeff;
      diff_x(tmp.data(), h, w, inv2hx, d1.data());
      diff_y(tmp.data(), h, w, inv2hy, d2.data());
      for (std::size_t i = 0; i < hw; ++i) {
        out.grad.data[base_vx + i] = -d1[i] * i_zero.data[base4 + i];
        out.grad.data[base_vy + i] = -d2[i] * i_zero.data[base4 + i];
      }
    }
  }
  out.value = s / n;
  return out;
}

LossValue loss_phase(const Tensor& v_pred, const Tensor& phase_gt, double step_x, double step_y) {
  check_v_shape(v_pred);
  if (phase_gt.shape.size() != 4) throw std::invalid_argument("loss_phase: phase_gt must be 4D");
  if (v_pred.shape[0] != phase_gt.shape[0] || v_pred.shape[2] != phase_gt.shape[1] ||
      v_pred.shape[3] != phase_gt.shape[2] || v_pred.shape[4] != phase_gt.shape[3])
    throw std::invalid_argument("loss_phase: v_pred/phase_gt shape mismatch");

  const int bsz = phase_gt.shape[0], c = phase_gt.shape[1], h = phase_gt.shape[2],
            w = phase_gt.shape[3];
  const std::size_t hw = std::size_t(h) * w;
  const double n = double(phase_gt.numel());
  Grid2 grid(w, h, step_x, step_y);

  LossValue out;
  out.grad = Tensor(v_pred.shape);
  double s = 0.0;
  for (int bi = 0; bi < bsz; ++bi) {
    for (int ci = 0; ci < c; ++ci) {
      std::size_t base4 = (std::size_t(bi) * c + ci) * hw;
      std::size_t base_vx = ((std::size_t(bi) * 2 + 0) * c + ci) * hw;
      std::size_t base_vy = ((std::size_t(bi) * 2 + 1) * c + ci) * hw;

      VectorField2 v(grid);
      for (std::size_t i = 0; i < hw; ++i) {
        v.x[i] = v_pred.data[base_vx + i];
        v.y[i] = v_pred.data[base_vy + i];
      }
      ScalarField phi = integrate_vector_field(v);

      double gmean = 0.0;
      for (std::size_t i = 0; i < hw; ++i) gmean += phase_gt.data[base4 + i];
      gmean /= double(hw);

      ScalarField err(grid);
      for (std::size_t i = 0; i < hw; ++i) {
        err.v[i] = phi.v[i] - (phase_gt.data[base4 + i] - gmean);
        s += err.v[i] * err.v[i];
        err.v[i] *= 2.0 / n;
      }
      VectorField2 gv = integrate_vector_field_adjoint(err);
      for (std::size_t i = 0; i < hw; ++i) {
        out.grad.data[base_vx + i] = gv.x[i];
        out.grad.data[base_vy + i] = gv.y[i];
      }
    }
  }
  out.value = s / n;
  return out;
}

}  // namespace flowtie::nn
