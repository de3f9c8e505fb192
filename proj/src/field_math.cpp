#include "flowtie/field_math.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace flowtie {

namespace {

// FFTW plan creation is not thread-safe; executing a plan on new arrays is.
// Plans are cached per (nx, ny, sign) with scratch buffers and FFTW_UNALIGNED
// so they can run on any caller-provided storage.
class PlanCache {
 public:
  static fftw_plan get(int nx, int ny, int sign) {
    static PlanCache cache;
    std::lock_guard<std::mutex> lock(cache.mutex_);
    auto key = std::make_tuple(nx, ny, sign);
    auto it = cache.plans_.find(key);
    if (it != cache.plans_.end()) return it->second;
    std::size_t n = std::size_t(nx) * ny;
    fftw_complex* scratch = fftw_alloc_complex(n);
    // Row-major data with x fastest means FFTW's n0 is ny.
    fftw_plan p = fftw_plan_dft_2d(ny, nx, scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    cache.plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace

ComplexField fft2(const ComplexField& field, FftDirection dir) {
  if (!all_finite(field.v)) throw std::invalid_argument("fft2: non-finite input");
  int sign = dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = PlanCache::get(field.grid.nx, field.grid.ny, sign);

  ComplexField out(field.grid);
  out.v = field.v;
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(out.v.data()),
                   reinterpret_cast<fftw_complex*>(out.v.data()));
  double scale = 1.0 / std::sqrt(double(field.grid.npix()));
  for (cdouble& a : out.v) a *= scale;
  return out;
}

VectorField2 spectral_gradient(const ScalarField& phi) {
  if (!all_finite(phi.v)) throw std::invalid_argument("spectral_gradient: non-finite input");
  const Grid2& g = phi.grid;
  ComplexField spec(g);
  for (std::size_t i = 0; i < phi.v.size(); ++i) spec.v[i] = phi.v[i];
  spec = fft2(spec, FftDirection::Forward);

  const double two_pi = 2.0 * std::numbers::pi;
  ComplexField sx(g), sy(g);
  for (int ky = 0; ky < g.ny; ++ky) {
    double qy = g.freq_y(ky);
    for (int kx = 0; kx < g.nx; ++kx) {
      double qx = g.freq_x(kx);
      cdouble s = spec.at(kx, ky);
      sx.at(kx, ky) = cdouble(0.0, two_pi * qx) * s;
      sy.at(kx, ky) = cdouble(0.0, two_pi * qy) * s;
    }
  }
  ComplexField gx = fft2(sx, FftDirection::Inverse);
  ComplexField gy = fft2(sy, FftDirection::Inverse);
  VectorField2 out(g);
  for (std::size_t i = 0; i < out.x.size(); ++i) {
    out.x[i] = gx.v[i].real();
    out.y[i] = gy.v[i].real();
  }
  return out;
}

ScalarField spectral_divergence(const VectorField2& v) {
  if (!all_finite(v.x) || !all_finite(v.y))
    throw std::invalid_argument("spectral_divergence: non-finite input");
  if (v.x.size() != v.grid.npix() || v.y.size() != v.grid.npix())
    throw std::invalid_argument("spectral_divergence: component/grid size mismatch");
  const Grid2& g = v.grid;
  ComplexField cx(g), cy(g);
  for (std::size_t i = 0; i < v.x.size(); ++i) {
    cx.v[i] = v.x[i];
    cy.v[i] = v.y[i];
  }
  cx = fft2(cx, FftDirection::Forward);
  cy = fft2(cy, FftDirection::Forward);

  const double two_pi = 2.0 * std::numbers::pi;
  ComplexField s(g);
  for (int ky = 0; ky < g.ny; ++ky) {
    double qy = g.freq_y(ky);
    for (int kx = 0; kx < g.nx; ++kx) {
      double qx = g.freq_x(kx);
      s.at(kx, ky) = cdouble(0.0, two_pi * qx) * cx.at(kx, ky) +
                     cdouble(0.0, two_pi * qy) * cy.at(kx, ky);
    }
  }
  ComplexField d = fft2(s, FftDirection::Inverse);
  ScalarField out(g);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = d.v[i].real();
  return out;
}

ScalarField spectral_laplacian(const ScalarField& phi) {
  const Grid2& g = phi.grid;
  ComplexField spec(g);
  for (std::size_t i = 0; i < phi.v.size(); ++i) spec.v[i] = phi.v[i];
  spec = fft2(spec, FftDirection::Forward);
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  for (int ky = 0; ky < g.ny; ++ky) {
    double qy = g.freq_y(ky);
    for (int kx = 0; kx < g.nx; ++kx) {
      double qx = g.freq_x(kx);
      spec.at(kx, ky) *= -four_pi2 * (qx * qx + qy * qy);
    }
  }
  ComplexField r = fft2(spec, FftDirection::Inverse);
  ScalarField out(g);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = r.v[i].real();
  return out;
}

ScalarField poisson_solve(const ScalarField& rhs, double tikhonov_eps) {
  if (!all_finite(rhs.v)) throw std::invalid_argument("poisson_solve: non-finite input");
  if (tikhonov_eps < 0.0) throw std::invalid_argument("poisson_solve: eps must be >= 0");
  const Grid2& g = rhs.grid;
  ComplexField spec(g);
  for (std::size_t i = 0; i < rhs.v.size(); ++i) spec.v[i] = rhs.v[i];
  spec = fft2(spec, FftDirection::Forward);
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  for (int ky = 0; ky < g.ny; ++ky) {
    double qy = g.freq_y(ky);
    for (int kx = 0; kx < g.nx; ++kx) {
      if (kx == 0 && ky == 0) {
        spec.at(0, 0) = 0.0;  // phase recoverable only up to a constant
        continue;
      }
      double qx = g.freq_x(kx);
      spec.at(kx, ky) /= -four_pi2 * (qx * qx + qy * qy) - tikhonov_eps;
    }
  }
  ComplexField r = fft2(spec, FftDirection::Inverse);
  ScalarField out(g);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = r.v[i].real();
  subtract_mean(out.v);
  return out;
}

ComplexField fresnel_propagate(const ComplexField& wave, double dz, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("fresnel_propagate: lambda must be > 0");
  const Grid2& g = wave.grid;
  ComplexField spec = fft2(wave, FftDirection::Forward);
  const double pi = std::numbers::pi;
  for (int ky = 0; ky < g.ny; ++ky) {
    double qy = g.freq_y(ky);
    for (int kx = 0; kx < g.nx; ++kx) {
      double qx = g.freq_x(kx);
      double arg = -pi * lambda * (qx * qx + qy * qy) * dz;
      spec.at(kx, ky) *= cdouble(std::cos(arg), std::sin(arg));
    }
  }
  return fft2(spec, FftDirection::Inverse);
}

}  // namespace flowtie
