#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flowtie/field_math.hpp"
#include "flowtie/microscope.hpp"
#include "flowtie/tie.hpp"
#include "oracles.hpp"

using namespace flowtie;
using std::numbers::pi;

namespace {

ScanGrid small_scan() {
  Grid2 det(8, 8, 0.5, 0.5);
  return make_scan_grid(det, 8, 8);
}

FourDDataset simulate(const CrystalStructure& s, int n_cells) {
  PotentialSlices ps = potential_slices(s, 16, s.cell[0] / 16.0, s.cell[2], n_cells, 300.0);
  ScanGrid scan = make_scan_grid(ps.grid, 16, 16);
  return simulate_4d(ps, {}, scan, s.name);
}

}  // namespace

TEST_CASE("zero axial derivative gives zero phase everywhere") {
  ScanGrid scan = small_scan();
  const std::size_t npos = 64;
  std::vector<double> i_zero(npos, 1.0), i_deriv(npos, 0.0);
  TiePhaseResult r = tie_phase(i_zero, i_deriv, 1, scan, 0.02, 0.0);
  CHECK(r.dark_channels.empty());
  for (double p : r.phase) CHECK(p == 0.0);
}

TEST_CASE("Laplacian eigenmode channel is recovered exactly") {
  ScanGrid scan = small_scan();
  Grid2 sg = scan.grid();
  const std::size_t npos = sg.npix();
  const double lambda = 0.0197;
  const double q = 1.0 / (8.0 * scan.step_x);  // one cycle across the scan
  std::vector<double> target(npos), i_zero(npos, 0.5), i_deriv(npos);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) target[sg.idx(x, y)] = std::cos(2.0 * pi * x / 8.0);
  // i_deriv chosen so the Poisson right-hand side equals the Laplacian of target
  for (std::size_t i = 0; i < npos; ++i)
    i_deriv[i] = (lambda / (2.0 * pi)) * 4.0 * pi * pi * q * q * target[i] * 0.5;
  TiePhaseResult r = tie_phase(i_zero, i_deriv, 1, scan, lambda, 0.0);
  for (std::size_t i = 0; i < npos; ++i) CHECK(std::abs(r.phase[i] - target[i]) < 1e-9);
}

TEST_CASE("tie_phase is linear in the axial derivative") {
  ScanGrid scan = small_scan();
  const std::size_t npos = 64;
  std::vector<double> i_zero(npos, 0.8);
  std::vector<double> d1 = oracles::random_vec(npos, 11), d2 = oracles::random_vec(npos, 12);
  std::vector<double> mix(npos);
  for (std::size_t i = 0; i < npos; ++i) mix[i] = 2.0 * d1[i] - 0.5 * d2[i];
  TiePhaseResult r1 = tie_phase(i_zero, d1, 1, scan, 0.02, 0.0);
  TiePhaseResult r2 = tie_phase(i_zero, d2, 1, scan, 0.02, 0.0);
  TiePhaseResult rm = tie_phase(i_zero, mix, 1, scan, 0.02, 0.0);
  for (std::size_t i = 0; i < npos; ++i)
    CHECK(rm.phase[i] == doctest::Approx(2.0 * r1.phase[i] - 0.5 * r2.phase[i]).epsilon(1e-10));
}

TEST_CASE("recovered phase is zero-mean per channel") {
  ScanGrid scan = small_scan();
  const std::size_t npos = 64;
  std::vector<double> i_zero(2 * npos, 1.0);
  std::vector<double> i_deriv = oracles::random_vec(2 * npos, 13);
  TiePhaseResult r = tie_phase(i_zero, i_deriv, 2, scan, 0.02, 0.0);
  for (int q = 0; q < 2; ++q) {
    double mean = 0.0;
    for (std::size_t i = 0; i < npos; ++i) mean += r.phase[std::size_t(q) * npos + i];
    CHECK(std::abs(mean / double(npos)) < 1e-12);
  }
}

TEST_CASE("larger regularizer shrinks the solution norm") {
  ScanGrid scan = small_scan();
  const std::size_t npos = 64;
  std::vector<double> i_zero(npos, 1.0);
  std::vector<double> i_deriv = oracles::random_vec(npos, 14);
  auto norm_at = [&](double eps) {
    TiePhaseResult r = tie_phase(i_zero, i_deriv, 1, scan, 0.02, eps);
    double s = 0.0;
    for (double p : r.phase) s += p * p;
    return std::sqrt(s);
  };
  double n0 = norm_at(0.0), n1 = norm_at(1.0), n2 = norm_at(10.0);
  CHECK(n0 > n1);
  CHECK(n1 > n2);
}

TEST_CASE("dark channels are skipped and reported") {
  ScanGrid scan = small_scan();
  const std::size_t npos = 64;
  std::vector<double> i_zero(2 * npos, 0.0), i_deriv(2 * npos, 0.3);
  for (std::size_t i = 0; i < npos; ++i) i_zero[npos + i] = 1.0;  // channel 1 is bright
  TiePhaseResult r = tie_phase(i_zero, i_deriv, 2, scan, 0.02, 0.0);
  REQUIRE(r.dark_channels.size() == 1);
  CHECK(r.dark_channels[0] == 0);
  for (std::size_t i = 0; i < npos; ++i) CHECK(r.phase[i] == 0.0);
}

TEST_CASE("input validation: size mismatch and negative eps are rejected") {
  ScanGrid scan = small_scan();
  std::vector<double> a(64, 1.0), b(63, 1.0);
  CHECK_THROWS_AS(tie_phase(a, b, 1, scan, 0.02, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tie_phase(a, a, 2, scan, 0.02, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tie_phase(a, a, 1, scan, 0.02, -1.0), std::invalid_argument);
}

TEST_CASE("Teague variant equals the Poisson variant for uniform intensity") {
  // band-limited derivative: the two-solve route drops Nyquist modes in the
  // intermediate gradient, so equality holds below the Nyquist frequency
  ScanGrid scan = small_scan();
  Grid2 sg = scan.grid();
  const std::size_t npos = 64;
  std::vector<double> i_zero(npos, 0.7);
  std::vector<double> i_deriv(npos);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      i_deriv[sg.idx(x, y)] = 0.4 * std::cos(2.0 * pi * x / 8.0) -
                              0.7 * std::sin(2.0 * pi * (2.0 * y + x) / 8.0) +
                              0.2 * std::cos(2.0 * pi * (3.0 * x - y) / 8.0);
  TiePhaseResult p = tie_phase(i_zero, i_deriv, 1, scan, 0.02, 0.0, TieVariant::Poisson);
  TiePhaseResult t = tie_phase(i_zero, i_deriv, 1, scan, 0.02, 0.0, TieVariant::Teague);
  for (std::size_t i = 0; i < npos; ++i) CHECK(std::abs(p.phase[i] - t.phase[i]) < 1e-9);
}

TEST_CASE("vacuum dataset reconstructs with vanishing projected-phase error") {
  CrystalStructure vac;
  vac.name = "vacuum";
  vac.cell = {4.0, 4.0, 4.0};
  FourDDataset ds = simulate(vac, 1);
  ReconResult r = tie_reconstruct(ds);
  CHECK(r.method == "tie");
  CHECK(r.mse < 1e-12);
}

TEST_CASE("thin GaAs: projected phase correlates strongly with the ground truth") {
  FourDDataset ds = simulate(preset_structure("GaAs"), 1);
  ReconResult r = tie_reconstruct(ds);
  CHECK(oracles::pearson(r.phase_proj.v, ds.proj_phase_gt) > 0.8);
}

TEST_CASE("reconstruction error grows with specimen thickness") {
  FourDDataset thin = simulate(preset_structure("GaAs"), 1);
  FourDDataset thick = simulate(preset_structure("GaAs"), 5);
  ReconResult r1 = tie_reconstruct(thin);
  ReconResult r5 = tie_reconstruct(thick);
  CHECK(r5.mse > r1.mse);
}

TEST_CASE("Teague variant runs end to end on a simulated dataset") {
  FourDDataset ds = simulate(preset_structure("SrTiO3"), 1);
  ReconResult r = tie_reconstruct(ds, 0.0, TieVariant::Teague);
  CHECK(r.method == "tie-teague");
  CHECK(std::isfinite(r.mse));
  CHECK(r.phase_proj.v.size() == 256);
}
