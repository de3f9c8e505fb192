#ifndef FLOWTIE_NN_LOSSES_HPP
#define FLOWTIE_NN_LOSSES_HPP

#include "flowtie/nn/tensor.hpp"

namespace flowtie::nn {

struct LossValue {
  double value = 0.0;
  Tensor grad;  // w.r.t. v_pred
};

// Mean squared error between predicted and ground-truth flows (B,2,C,H,W).
LossValue loss_vf(const Tensor& v_pred, const Tensor& v_gt);

// || i_deriv + (lambda / 2 pi) div( i_zero * v_pred ) ||^2 averaged over all
// elements; divergence by periodic central differences on the scan grid.
LossValue loss_cont(const Tensor& i_deriv, const Tensor& i_zero, const Tensor& v_pred,
                    double lambda, double step_x, double step_y);

// || integrate(v_pred) - zero_mean(phase_gt) ||^2 averaged over all elements;
// the integrator is the spectral least-squares integral (linear in v_pred).
LossValue loss_phase(const Tensor& v_pred, const Tensor& phase_gt, double step_x, double step_y);

}  // namespace flowtie::nn

#endif
