#include "flowtie/tie.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "flowtie/field_math.hpp"

namespace flowtie {

namespace {

constexpr double kDarkFloor = 1e-12;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

TiePhaseResult tie_phase(const std::vector<double>& i_zero, const std::vector<double>& i_deriv,
                         int n_channels, const ScanGrid& scan, double lambda, double eps,
                         TieVariant variant) {
  if (i_zero.size() != i_deriv.size())
    throw std::invalid_argument("tie_phase: stack size mismatch");
  if (eps < 0.0) throw std::invalid_argument("tie_phase: eps must be >= 0");
  const std::size_t npos = std::size_t(scan.sy) * scan.sx;
  if (i_zero.size() != std::size_t(n_channels) * npos)
    throw std::invalid_argument("tie_phase: stack does not match channel/scan counts");

  Grid2 sg = scan.grid();
  const double prefactor = 2.0 * std::numbers::pi / lambda;

  TiePhaseResult out;
  out.phase.assign(i_zero.size(), 0.0);

  for (int q = 0; q < n_channels; ++q) {
    const double* iz = i_zero.data() + std::size_t(q) * npos;
    const double* id = i_deriv.data() + std::size_t(q) * npos;

    double ibar = 0.0;
    for (std::size_t i = 0; i < npos; ++i) ibar += iz[i];
    ibar /= double(npos);
    if (ibar < kDarkFloor) {
      out.dark_channels.push_back(q);
      continue;  // dark channel: phase stays 0
    }

    ScalarField phi;
    if (variant == TieVariant::Poisson) {
      ScalarField rhs(sg);
      for (std::size_t i = 0; i < npos; ++i) rhs.v[i] = -prefactor * id[i] / ibar;
      phi = poisson_solve(rhs, eps);
    } else {
      // Teague: psi from the Poisson step, then phi = integrate(grad psi / I)
      ScalarField rhs(sg);
      for (std::size_t i = 0; i < npos; ++i) rhs.v[i] = -prefactor * id[i];
      ScalarField psi = poisson_solve(rhs, eps);
      VectorField2 gpsi = spectral_gradient(psi);
      for (std::size_t i = 0; i < npos; ++i) {
        double denom = std::max(iz[i], kDarkFloor);
        gpsi.x[i] /= denom;
        gpsi.y[i] /= denom;
      }
      phi = poisson_solve(spectral_divergence(gpsi), eps);
    }
    for (std::size_t i = 0; i < npos; ++i) out.phase[std::size_t(q) * npos + i] = phi.v[i];
  }
  return out;
}

ReconResult tie_reconstruct(const FourDDataset& ds, double eps, TieVariant variant) {
  double t0 = now_seconds();
  std::vector<double> i_deriv = axial_derivative(ds.i_plus, ds.i_minus, ds.delta_z_defocus);
  TiePhaseResult tp =
      tie_phase(ds.i_zero, i_deriv, ds.n_channels(), ds.scan, ds.lambda, eps, variant);
  // the spectral solve yields the periodic residual; restore the geometric
  // scan carrier before exit-wave assembly (dark channels stay at zero)
  std::vector<double> carrier = scan_carrier_phase(ds.det_grid, ds.scan);
  const std::size_t npos = std::size_t(ds.scan.sy) * ds.scan.sx;
  std::size_t dark = 0;
  for (int q = 0; q < ds.n_channels(); ++q) {
    if (dark < tp.dark_channels.size() && tp.dark_channels[dark] == q) {
      ++dark;
      continue;
    }
    for (std::size_t i = 0; i < npos; ++i)
      tp.phase[std::size_t(q) * npos + i] += carrier[std::size_t(q) * npos + i];
  }
  ReconResult r = run_inference_tail(ds, tp.phase, variant == TieVariant::Poisson ? "tie" : "tie-teague");
  r.wall_time = now_seconds() - t0;
  return r;
}

}  // namespace flowtie
