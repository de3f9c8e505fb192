#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flowtie/field_math.hpp"
#include "oracles.hpp"

using namespace flowtie;
using std::numbers::pi;

namespace {

ComplexField random_complex(const Grid2& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexField f(g);
  for (cdouble& a : f.v) a = cdouble(u(rng), u(rng));
  return f;
}

ScalarField random_scalar(const Grid2& g, std::uint64_t seed) {
  ScalarField f(g);
  f.v = oracles::random_vec(g.npix(), seed);
  return f;
}

// Band-limited random field: keep only low-order modes so stencil/spectral
// comparisons are meaningful.
ScalarField random_bandlimited(const Grid2& g, std::uint64_t seed, int kmax) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(g);
  for (int ky = -kmax; ky <= kmax; ++ky) {
    for (int kx = -kmax; kx <= kmax; ++kx) {
      double amp = u(rng), ph = pi * u(rng);
      for (int y = 0; y < g.ny; ++y)
        for (int x = 0; x < g.nx; ++x)
          f.v[g.idx(x, y)] +=
              amp * std::cos(2.0 * pi * (double(kx) * x / g.nx + double(ky) * y / g.ny) + ph);
    }
  }
  return f;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace

TEST_CASE("fft2 constant field concentrates at DC with unitary scaling") {
  Grid2 g(4, 4, 1.0, 1.0);
  ComplexField f(g, 1.0);
  ComplexField fw = fft2(f, FftDirection::Forward);
  CHECK(std::abs(fw.v[0] - cdouble(4.0, 0.0)) < 1e-12);
  for (std::size_t i = 1; i < fw.v.size(); ++i) CHECK(std::abs(fw.v[i]) < 1e-12);
}

TEST_CASE("fft2 round trip is the identity") {
  Grid2 g(8, 8, 0.5, 0.5);
  ComplexField f = random_complex(g, 11);
  ComplexField back = fft2(fft2(f, FftDirection::Forward), FftDirection::Inverse);
  double scale = 0.0;
  for (const cdouble& a : f.v) scale = std::max(scale, std::abs(a));
  CHECK(max_abs_diff(f, back) / scale < 1e-12);
}

TEST_CASE("fft2 of a single complex exponential hits one bin (direct DFT oracle)") {
  Grid2 g(8, 8, 0.5, 0.5);
  ComplexField f(g);
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x)
      f.v[g.idx(x, y)] = std::polar(1.0, 2.0 * pi * x / g.nx);
  ComplexField fw = fft2(f, FftDirection::Forward);
  // analytic: bin (kx=1, ky=0) = sqrt(64)
  CHECK(std::abs(fw.at(1, 0) - cdouble(8.0, 0.0)) < 1e-12);
  for (int ky = 0; ky < g.ny; ++ky)
    for (int kx = 0; kx < g.nx; ++kx)
      if (!(kx == 1 && ky == 0)) CHECK(std::abs(fw.at(kx, ky)) < 1e-12);
  // full agreement with the direct O(n^4) summation oracle
  ComplexField oracle = oracles::dft2_direct(f, true);
  CHECK(max_abs_diff(fw, oracle) < 1e-11);
}

TEST_CASE("fft2 matches the direct DFT oracle on random input, both directions") {
  Grid2 g(6, 5, 0.7, 0.9);  // non-power-of-two, anisotropic
  ComplexField f = random_complex(g, 21);
  CHECK(max_abs_diff(fft2(f, FftDirection::Forward), oracles::dft2_direct(f, true)) < 1e-12);
  CHECK(max_abs_diff(fft2(f, FftDirection::Inverse), oracles::dft2_direct(f, false)) < 1e-12);
}

TEST_CASE("fft2 rejects non-finite input") {
  Grid2 g(4, 4, 1.0, 1.0);
  ComplexField f(g, 1.0);
  f.v[3] = cdouble(std::nan(""), 0.0);
  CHECK_THROWS(fft2(f, FftDirection::Forward));
}

TEST_CASE("Parseval holds to 1e-12 relative") {
  Grid2 g(16, 16, 0.3, 0.3);
  ComplexField f = random_complex(g, 31);
  double before = total_intensity(f);
  double after = total_intensity(fft2(f, FftDirection::Forward));
  CHECK(std::abs(before - after) / before < 1e-12);
}

TEST_CASE("spectral_gradient of a constant is zero") {
  Grid2 g(8, 8, 1.0, 1.0);
  ScalarField f(g, 3.25);
  VectorField2 v = spectral_gradient(f);
  for (std::size_t i = 0; i < v.x.size(); ++i) {
    CHECK(std::abs(v.x[i]) < 1e-12);
    CHECK(std::abs(v.y[i]) < 1e-12);
  }
}

TEST_CASE("spectral_gradient of a sine mode is the analytic cosine") {
  Grid2 g(8, 8, 0.5, 0.5);
  double L = g.extent_x();
  ScalarField f(g);
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x) f.v[g.idx(x, y)] = std::sin(2.0 * pi * (x * g.pitch_x) / L);
  VectorField2 v = spectral_gradient(f);
  for (int y = 0; y < g.ny; ++y) {
    for (int x = 0; x < g.nx; ++x) {
      double expect = (2.0 * pi / L) * std::cos(2.0 * pi * (x * g.pitch_x) / L);
      CHECK(std::abs(v.x[g.idx(x, y)] - expect) < 1e-10);
      CHECK(std::abs(v.y[g.idx(x, y)]) < 1e-10);
    }
  }
}

TEST_CASE("spectral_gradient matches central differences on band-limited fields") {
  Grid2 g(32, 32, 0.25, 0.25);
  ScalarField f = random_bandlimited(g, 41, 2);
  VectorField2 spec = spectral_gradient(f);
  VectorField2 fd = oracles::fd_gradient(f);
  // second-order stencil error bound for modes up to kmax=2:
  // |error| <= |d3f/dx3| h^2/6 per mode; measured empirically well inside 5e-2
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < spec.x.size(); ++i) {
    worst = std::max({worst, std::abs(spec.x[i] - fd.x[i]), std::abs(spec.y[i] - fd.y[i])});
    scale = std::max({scale, std::abs(spec.x[i]), std::abs(spec.y[i])});
  }
  CHECK(worst / scale < 5e-2);
}

TEST_CASE("spectral_divergence of constant components is zero") {
  Grid2 g(8, 8, 1.0, 1.0);
  VectorField2 v(g);
  for (std::size_t i = 0; i < v.x.size(); ++i) {
    v.x[i] = 1.5;
    v.y[i] = -0.5;
  }
  ScalarField d = spectral_divergence(v);
  for (double a : d.v) CHECK(std::abs(a) < 1e-12);
}

TEST_CASE("divergence of gradient is the Laplacian eigenvalue on a sine mode") {
  Grid2 g(16, 16, 0.5, 0.5);
  double L = g.extent_x();
  ScalarField f(g);
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x) f.v[g.idx(x, y)] = std::sin(2.0 * pi * (x * g.pitch_x) / L);
  ScalarField lap = spectral_divergence(spectral_gradient(f));
  double ev = -(2.0 * pi / L) * (2.0 * pi / L);
  for (std::size_t i = 0; i < lap.v.size(); ++i) CHECK(std::abs(lap.v[i] - ev * f.v[i]) < 1e-10);
}

TEST_CASE("spectral_divergence matches the finite-difference oracle on band-limited input") {
  Grid2 g(32, 32, 0.25, 0.25);
  VectorField2 v(g);
  ScalarField a = random_bandlimited(g, 43, 2), b = random_bandlimited(g, 44, 2);
  v.x = a.v;
  v.y = b.v;
  ScalarField spec = spectral_divergence(v);
  ScalarField fd = oracles::fd_divergence(v);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < spec.v.size(); ++i) {
    worst = std::max(worst, std::abs(spec.v[i] - fd.v[i]));
    scale = std::max(scale, std::abs(spec.v[i]));
  }
  CHECK(worst / scale < 5e-2);
}

TEST_CASE("spectral_divergence rejects grid mismatch") {
  VectorField2 v(Grid2(8, 8, 1.0, 1.0));
  v.y.resize(Grid2(4, 4, 1.0, 1.0).npix());
  CHECK_THROWS(spectral_divergence(v));
}

TEST_CASE("gradient/divergence adjointness") {
  Grid2 g(16, 16, 0.4, 0.4);
  ScalarField phi = random_scalar(g, 51);
  VectorField2 v(g);
  v.x = oracles::random_vec(g.npix(), 52);
  v.y = oracles::random_vec(g.npix(), 53);
  VectorField2 gp = spectral_gradient(phi);
  ScalarField dv = spectral_divergence(v);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < phi.v.size(); ++i) {
    lhs += gp.x[i] * v.x[i] + gp.y[i] * v.y[i];
    rhs += phi.v[i] * dv.v[i];
  }
  CHECK(std::abs(lhs + rhs) / std::max(std::abs(lhs), 1.0) < 1e-10);
}

TEST_CASE("poisson_solve of zero is zero") {
  Grid2 g(8, 8, 1.0, 1.0);
  ScalarField phi = poisson_solve(ScalarField(g), 0.0);
  for (double a : phi.v) CHECK(a == 0.0);
}

TEST_CASE("poisson_solve inverts the cosine eigenmode") {
  Grid2 g(16, 16, 0.5, 0.5);
  double L = g.extent_x();
  ScalarField rhs(g), expect(g);
  for (int y = 0; y < g.ny; ++y) {
    for (int x = 0; x < g.nx; ++x) {
      double c = std::cos(2.0 * pi * (x * g.pitch_x) / L);
      rhs.v[g.idx(x, y)] = -(2.0 * pi / L) * (2.0 * pi / L) * c;
      expect.v[g.idx(x, y)] = c;
    }
  }
  subtract_mean(expect.v);
  ScalarField phi = poisson_solve(rhs, 0.0);
  for (std::size_t i = 0; i < phi.v.size(); ++i) CHECK(std::abs(phi.v[i] - expect.v[i]) < 1e-10);
}

TEST_CASE("laplacian(poisson_solve(r)) returns zero-mean r") {
  Grid2 g(16, 16, 0.3, 0.3);
  ScalarField r = random_scalar(g, 61);
  subtract_mean(r.v);
  ScalarField round = spectral_laplacian(poisson_solve(r, 0.0));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r.v.size(); ++i) {
    num += (round.v[i] - r.v[i]) * (round.v[i] - r.v[i]);
    den += r.v[i] * r.v[i];
  }
  CHECK(std::sqrt(num / den) < 1e-9);
}

TEST_CASE("poisson_solve output is exactly zero-mean") {
  Grid2 g(12, 10, 0.7, 0.4);
  ScalarField r = random_scalar(g, 62);
  ScalarField phi = poisson_solve(r, 0.0);
  CHECK(std::abs(mean(phi.v)) < 1e-14);
}

TEST_CASE("poisson_solve norm is monotone non-increasing in eps") {
  Grid2 g(16, 16, 0.5, 0.5);
  ScalarField r = random_scalar(g, 63);
  double prev = -1.0;
  for (double eps : {0.0, 0.1, 1.0, 10.0}) {
    ScalarField phi = poisson_solve(r, eps);
    double n2 = 0.0;
    for (double a : phi.v) n2 += a * a;
    if (prev >= 0.0) CHECK(n2 <= prev + 1e-15);
    prev = n2;
  }
}

TEST_CASE("fresnel_propagate with dz = 0 is the identity") {
  Grid2 g(8, 8, 0.5, 0.5);
  ComplexField f = random_complex(g, 71);
  CHECK(max_abs_diff(fresnel_propagate(f, 0.0, 0.02), f) < 1e-12);
}

TEST_CASE("fresnel_propagate forward then backward is the identity") {
  Grid2 g(16, 16, 0.4, 0.4);
  ComplexField f = random_complex(g, 72);
  ComplexField back = fresnel_propagate(fresnel_propagate(f, 35.0, 0.02), -35.0, 0.02);
  CHECK(max_abs_diff(back, f) < 1e-12);
}

TEST_CASE("fresnel_propagate conserves total intensity") {
  Grid2 g(16, 16, 0.4, 0.4);
  ComplexField f = random_complex(g, 73);
  double before = total_intensity(f);
  double after = total_intensity(fresnel_propagate(f, 120.0, 0.0197));
  CHECK(std::abs(before - after) / before < 1e-12);
}

TEST_CASE("fresnel_propagate composes additively in dz") {
  Grid2 g(16, 16, 0.4, 0.4);
  ComplexField f = random_complex(g, 74);
  ComplexField two_step = fresnel_propagate(fresnel_propagate(f, 20.0, 0.02), 30.0, 0.02);
  ComplexField one_step = fresnel_propagate(f, 50.0, 0.02);
  CHECK(max_abs_diff(two_step, one_step) < 1e-12);
}
