#ifndef FLOWTIE_RECON_HPP
#define FLOWTIE_RECON_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "flowtie/field.hpp"
#include "flowtie/microscope.hpp"
#include "flowtie/nn/model.hpp"

namespace flowtie {

// Least-squares (curl-discarding) integral of a vector field:
// phi = poisson_solve(div v, 0). Zero-mean, linear in v.
ScalarField integrate_vector_field(const VectorField2& v);

// Adjoint of integrate_vector_field; the gradient path of the phase loss.
VectorField2 integrate_vector_field_adjoint(const ScalarField& g);

// E_pred = sqrt(I0) * exp(i phase), elementwise on stacks (N^2, Sy, Sx)
// arranged as one column per scan position.
Eigen::MatrixXcd assemble_exit_wave(const std::vector<double>& i_zero,
                                    const std::vector<double>& phase, int n_channels,
                                    int n_positions);

// A_pred = IFFT-per-column(E_pred) P^H, columns scaled by 1/(diag(P P^H)+ridge).
Eigen::MatrixXcd estimate_matrix_potential(const Eigen::MatrixXcd& e_pred,
                                           const Eigen::MatrixXcd& probe_mat,
                                           const Grid2& det_grid, double ridge);

// Phase of the diagonal of A_pred on the scan grid, zero-mean aligned.
ScalarField project_phase(const Eigen::MatrixXcd& a_pred, const ScanGrid& scan,
                          const Grid2& det_grid);

// Gauge-aligned mean squared error: mean((pred - gt - mean(pred - gt))^2).
double phase_mse(const ScalarField& pred, const ScalarField& gt);

struct ReconResult {
  std::string method;
  ScalarField phase_proj;
  std::optional<Eigen::MatrixXcd> matrix_potential;
  std::optional<std::vector<double>> phase_stack;  // per-channel phases
  double mse = 0.0;
  double wall_time = 0.0;  // seconds, full pipeline
  double off_diagonal_energy = 0.0;  // |A|^2 off the diagonal / total, diagnostic
  std::vector<double> objective_curve;  // gradient-descent only
  std::string config_echo;
};

// Shared inference tail: exit-wave assembly, matrix potential, projected
// phase, metric. phase is a per-channel stack on the scan grid.
ReconResult run_inference_tail(const FourDDataset& ds, const std::vector<double>& phase,
                               const std::string& method, double ridge_rel = 1e-6);

ReconResult flowtie_reconstruct(const FourDDataset& ds, nn::FlowModel& model);

struct GdOptions {
  int iters = 100;
  int power_iters = 20;
  double amp_floor = 1e-12;
};

// Amplitude-flow gradient descent on || sqrt(I) - |F A P| ||_F^2 starting from
// A = identity, with a step-halving safeguard.
ReconResult gd_reconstruct(const FourDDataset& ds, const GdOptions& opt = {});

void save_recon_result(const ReconResult& r, const std::string& dir, bool with_matrix = false);

}  // namespace flowtie

#endif
