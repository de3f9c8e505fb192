#include "flowtie/recon.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "flowtie/field_math.hpp"
#include "flowtie/io/container.hpp"

namespace flowtie {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

ScalarField integrate_vector_field(const VectorField2& v) {
  return poisson_solve(spectral_divergence(v), 0.0);
}

VectorField2 integrate_vector_field_adjoint(const ScalarField& g) {
  // adjoint of poisson_solve is itself (real symmetric spectral kernel);
  // adjoint of spectral divergence is minus the spectral gradient
  VectorField2 out = spectral_gradient(poisson_solve(g, 0.0));
  for (double& a : out.x) a = -a;
  for (double& a : out.y) a = -a;
  return out;
}

Eigen::MatrixXcd assemble_exit_wave(const std::vector<double>& i_zero,
                                    const std::vector<double>& phase, int n_channels,
                                    int n_positions) {
  std::size_t expect = std::size_t(n_channels) * n_positions;
  if (i_zero.size() != expect || phase.size() != expect)
    throw std::invalid_argument("assemble_exit_wave: stack size mismatch");
  Eigen::MatrixXcd e(n_channels, n_positions);
  for (int q = 0; q < n_channels; ++q) {
    for (int s = 0; s < n_positions; ++s) {
      double inten = i_zero[std::size_t(q) * n_positions + s];
      if (inten < 0.0) throw std::invalid_argument("assemble_exit_wave: negative intensity");
      double ph = phase[std::size_t(q) * n_positions + s];
      e(q, s) = std::sqrt(inten) * cdouble(std::cos(ph), std::sin(ph));
    }
  }
  return e;
}

Eigen::MatrixXcd estimate_matrix_potential(const Eigen::MatrixXcd& e_pred,
                                           const Eigen::MatrixXcd& probe_mat,
                                           const Grid2& det_grid, double ridge) {
  if (det_grid.nx > 32 || det_grid.ny > 32)
    throw std::invalid_argument("estimate_matrix_potential: dense path restricted to N <= 32");
  if (e_pred.rows() != probe_mat.rows() || e_pred.cols() != probe_mat.cols())
    throw std::invalid_argument("estimate_matrix_potential: E/P shape mismatch");

  Eigen::VectorXd d = probe_mat.cwiseAbs2().rowwise().sum();
  if (d.maxCoeff() < 1e-12)
    throw std::invalid_argument("estimate_matrix_potential: probe never illuminates the grid");

  Eigen::MatrixXcd e_real = fft_columns(e_pred, det_grid, false);
  Eigen::MatrixXcd m = e_real * probe_mat.adjoint();
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) /= (d(j) + ridge);
  return m;
}

ScalarField project_phase(const Eigen::MatrixXcd& a_pred, const ScanGrid& scan,
                          const Grid2& det_grid) {
  if (a_pred.rows() != a_pred.cols() || std::size_t(a_pred.rows()) != det_grid.npix())
    throw std::invalid_argument("project_phase: expected square N^2 x N^2 matrix");

  ScalarField on_det(det_grid);
  for (Eigen::Index i = 0; i < a_pred.rows(); ++i) {
    cdouble di = a_pred(i, i);
    on_det.v[i] = (std::abs(di) == 0.0) ? 0.0 : std::arg(di);
  }

  ScalarField out(scan.grid());
  for (int sy = 0; sy < scan.sy; ++sy)
    for (int sx = 0; sx < scan.sx; ++sx)
      out.at(sx, sy) = on_det.at(sx * scan.step_px_x, sy * scan.step_px_y);
  subtract_mean(out.v);
  return out;
}

double phase_mse(const ScalarField& pred, const ScalarField& gt) {
  require_same_grid(pred.grid, gt.grid, "phase_mse");
  double md = 0.0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) md += pred.v[i] - gt.v[i];
  md /= double(pred.v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    double d = pred.v[i] - gt.v[i] - md;
    s += d * d;
  }
  return s / double(pred.v.size());
}

ReconResult run_inference_tail(const FourDDataset& ds, const std::vector<double>& phase,
                               const std::string& method, double ridge_rel) {
  const int nq = ds.n_channels();
  const int npos = ds.scan.sy * ds.scan.sx;

  Eigen::MatrixXcd e_pred = assemble_exit_wave(ds.i_zero, phase, nq, npos);
  Probe probe = make_probe(ds.det_grid, ds.semi_angle_mrad, 0.0, ds.lambda);
  Eigen::MatrixXcd p = probe_matrix(probe, ds.scan);
  double d_max = p.cwiseAbs2().rowwise().sum().maxCoeff();
  Eigen::MatrixXcd a = estimate_matrix_potential(e_pred, p, ds.det_grid, ridge_rel * d_max);

  ReconResult r;
  r.method = method;
  r.phase_stack = phase;
  r.phase_proj = project_phase(a, ds.scan, ds.det_grid);

  double diag_e = 0.0, total_e = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    diag_e += std::norm(a(i, i));
    total_e += a.row(i).squaredNorm();
  }
  r.off_diagonal_energy = total_e > 0.0 ? (total_e - diag_e) / total_e : 0.0;

  ScalarField gt(r.phase_proj.grid);
  gt.v = ds.proj_phase_gt;
  r.mse = phase_mse(r.phase_proj, gt);
  r.matrix_potential = std::move(a);
  return r;
}

ReconResult flowtie_reconstruct(const FourDDataset& ds, nn::FlowModel& model) {
  if (model.c_in != ds.n_channels())
    throw std::invalid_argument("flowtie_reconstruct: model/dataset geometry mismatch");
  const int nq = ds.n_channels();
  const int h = ds.scan.sy, w = ds.scan.sx;
  const std::size_t npos = std::size_t(h) * w;

  double t0 = now_seconds();

  nn::Tensor x({1, nq, h, w});
  x.data = axial_derivative(ds.i_plus, ds.i_minus, ds.delta_z_defocus);
  model.train_mode = false;
  nn::Tensor v = model.forward(x);

  // integrate each channel's flow over the scan grid; the integrator output
  // is periodic, so the geometric scan carrier is restored on top of it
  std::vector<double> phase = scan_carrier_phase(ds.det_grid, ds.scan);
  Grid2 sg = ds.scan.grid();
  for (int q = 0; q < nq; ++q) {
    VectorField2 vf(sg);
    for (std::size_t i = 0; i < npos; ++i) {
      vf.x[i] = v.data[std::size_t(q) * npos + i];
      vf.y[i] = v.data[(std::size_t(nq) + q) * npos + i];
    }
    ScalarField phi = integrate_vector_field(vf);
    for (std::size_t i = 0; i < npos; ++i) phase[std::size_t(q) * npos + i] += phi.v[i];
  }

  ReconResult r = run_inference_tail(ds, phase, "flowtie");
  r.wall_time = now_seconds() - t0;
  return r;
}

ReconResult gd_reconstruct(const FourDDataset& ds, const GdOptions& opt) {
  const Grid2& g = ds.det_grid;
  if (g.nx > 32 || g.ny > 32)
    throw std::invalid_argument("gd_reconstruct: dense path restricted to N <= 32");
  const int nq = ds.n_channels();
  const int npos = ds.scan.sy * ds.scan.sx;

  double t0 = now_seconds();

  Probe probe = make_probe(g, ds.semi_angle_mrad, 0.0, ds.lambda);
  Eigen::MatrixXcd p = probe_matrix(probe, ds.scan);

  Eigen::MatrixXd sqrt_i(nq, npos);
  for (int q = 0; q < nq; ++q)
    for (int s = 0; s < npos; ++s)
      sqrt_i(q, s) = std::sqrt(std::max(0.0, ds.i_zero[std::size_t(q) * npos + s]));

  // step size from the largest singular value of P (20 power-iteration steps)
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(nq);
  x.normalize();
  double norm2 = 1.0;
  for (int it = 0; it < opt.power_iters; ++it) {
    Eigen::VectorXcd y = p * (p.adjoint() * x);
    norm2 = y.norm();
    if (norm2 == 0.0) break;
    x = y / norm2;
  }
  double eta = norm2 > 0.0 ? 1.0 / norm2 : 1.0;

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(nq, nq);
  ReconResult r;
  r.method = "gd";

  auto objective = [&](const Eigen::MatrixXcd& w) {
    return (sqrt_i - w.cwiseAbs()).squaredNorm();
  };

  Eigen::MatrixXcd w = fft_columns(a * p, g, true);
  double obj = objective(w);
  r.objective_curve.push_back(obj);
  int bad_streak = 0;

  for (int it = 0; it < opt.iters; ++it) {
    Eigen::MatrixXcd resid(nq, npos);
    for (int q = 0; q < nq; ++q) {
      for (int s = 0; s < npos; ++s) {
        double aw = std::abs(w(q, s));
        resid(q, s) = -(sqrt_i(q, s) - aw) * w(q, s) / std::max(aw, opt.amp_floor);
      }
    }
    Eigen::MatrixXcd grad = fft_columns(resid, g, false) * p.adjoint();
    Eigen::MatrixXcd a_next = a - eta * grad;
    Eigen::MatrixXcd w_next = fft_columns(a_next * p, g, true);
    double obj_next = objective(w_next);
    if (obj_next > obj) {
      // reject the ascent step; halve the step size after 5 rejections in a row
      ++bad_streak;
      if (bad_streak >= 5) {
        eta *= 0.5;
        bad_streak = 0;
      }
      r.objective_curve.push_back(obj);
      continue;
    }
    bad_streak = 0;
    a = std::move(a_next);
    w = std::move(w_next);
    obj = obj_next;
    r.objective_curve.push_back(obj);
  }

  r.phase_proj = project_phase(a, ds.scan, ds.det_grid);
  ScalarField gt(r.phase_proj.grid);
  gt.v = ds.proj_phase_gt;
  r.mse = phase_mse(r.phase_proj, gt);
  r.matrix_potential = std::move(a);
  r.wall_time = now_seconds() - t0;
  return r;
}

void save_recon_result(const ReconResult& r, const std::string& dir, bool with_matrix) {
  std::filesystem::create_directories(dir);
  io::Manifest m;
  auto& md = m.metadata();
  md["kind"] = "recon_result";
  md["method"] = r.method;
  md["mse"] = r.mse;
  md["wall_time"] = r.wall_time;
  md["off_diagonal_energy"] = r.off_diagonal_energy;
  md["config_echo"] = r.config_echo;
  md["scan_sy"] = r.phase_proj.grid.ny;
  md["scan_sx"] = r.phase_proj.grid.nx;
  md["scan_step_y"] = r.phase_proj.grid.pitch_y;
  md["scan_step_x"] = r.phase_proj.grid.pitch_x;

  m.add_tensor(dir, "phase_proj",
               io::make_f64({std::uint64_t(r.phase_proj.grid.ny),
                             std::uint64_t(r.phase_proj.grid.nx)},
                            r.phase_proj.v));
  if (!r.objective_curve.empty())
    m.add_tensor(dir, "objective_curve",
                 io::make_f64({r.objective_curve.size()}, r.objective_curve));
  if (with_matrix && r.matrix_potential) {
    const Eigen::MatrixXcd& a = *r.matrix_potential;
    std::vector<cdouble> flat(a.size());
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      for (Eigen::Index row = 0; row < a.rows(); ++row)
        flat[std::size_t(row) * a.cols() + c] = a(row, c);
    m.add_tensor(dir, "matrix_potential",
                 io::make_c128({std::uint64_t(a.rows()), std::uint64_t(a.cols())}, flat));
  }
  m.save(dir + "/manifest.json");
}

}  // namespace flowtie
