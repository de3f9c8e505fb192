#ifndef FLOWTIE_FIELD_HPP
#define FLOWTIE_FIELD_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowtie {

using cdouble = std::complex<double>;

// Periodic 2D pixel grid. Frequency samples follow standard DFT ordering:
// k/(n*pitch) for k < n/2, (k-n)/(n*pitch) otherwise, in 1/Angstrom.
struct Grid2 {
  int nx = 0, ny = 0;
  double pitch_x = 0.0, pitch_y = 0.0;

  Grid2() = default;
  Grid2(int nx_, int ny_, double px, double py)
      : nx(nx_), ny(ny_), pitch_x(px), pitch_y(py) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("Grid2: need nx, ny >= 2");
    if (!(pitch_x > 0.0) || !(pitch_y > 0.0))
      throw std::invalid_argument("Grid2: pitch must be positive");
  }

  std::size_t npix() const { return std::size_t(nx) * std::size_t(ny); }
  std::size_t idx(int x, int y) const { return std::size_t(y) * nx + x; }

  double freq_x(int k) const {
    return (k < (nx + 1) / 2 ? double(k) : double(k - nx)) / (nx * pitch_x);
  }
  double freq_y(int k) const {
    return (k < (ny + 1) / 2 ? double(k) : double(k - ny)) / (ny * pitch_y);
  }

  double extent_x() const { return nx * pitch_x; }
  double extent_y() const { return ny * pitch_y; }

  bool operator==(const Grid2&) const = default;
};

inline void require_same_grid(const Grid2& a, const Grid2& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

// One real value per pixel, row-major (x fastest).
struct ScalarField {
  Grid2 grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const Grid2& g, double fill = 0.0) : grid(g), v(g.npix(), fill) {}

  double& at(int x, int y) { return v[grid.idx(x, y)]; }
  double at(int x, int y) const { return v[grid.idx(x, y)]; }
};

// Complex amplitude per pixel, row-major.
struct ComplexField {
  Grid2 grid;
  std::vector<cdouble> v;

  ComplexField() = default;
  explicit ComplexField(const Grid2& g, cdouble fill = {}) : grid(g), v(g.npix(), fill) {}

  cdouble& at(int x, int y) { return v[grid.idx(x, y)]; }
  cdouble at(int x, int y) const { return v[grid.idx(x, y)]; }
};

// Two real components per pixel sharing one grid (rad/Angstrom for phase flows).
struct VectorField2 {
  Grid2 grid;
  std::vector<double> x, y;

  VectorField2() = default;
  explicit VectorField2(const Grid2& g) : grid(g), x(g.npix(), 0.0), y(g.npix(), 0.0) {}
};

inline bool all_finite(const std::vector<double>& v) {
  for (double a : v)
    if (!std::isfinite(a)) return false;
  return true;
}

inline bool all_finite(const std::vector<cdouble>& v) {
  for (const cdouble& a : v)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
  return true;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a;
  return v.empty() ? 0.0 : s / double(v.size());
}

inline void subtract_mean(std::vector<double>& v) {
  double m = mean(v);
  for (double& a : v) a -= m;
}

}  // namespace flowtie

#endif
