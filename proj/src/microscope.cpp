#include "flowtie/microscope.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "flowtie/field_math.hpp"

namespace flowtie {

namespace {

ComplexField roll(const ComplexField& f, int sx, int sy) {
  const Grid2& g = f.grid;
  ComplexField out(g);
  sx = ((sx % g.nx) + g.nx) % g.nx;
  sy = ((sy % g.ny) + g.ny) % g.ny;
  for (int y = 0; y < g.ny; ++y) {
    int ys = (y - sy + g.ny) % g.ny;
    for (int x = 0; x < g.nx; ++x) {
      int xs = (x - sx + g.nx) % g.nx;
      out.at(x, y) = f.at(xs, ys);
    }
  }
  return out;
}

}  // namespace

Probe make_probe(const Grid2& grid, double semi_angle_mrad, double defocus, double lambda) {
  if (!(semi_angle_mrad > 0.0)) throw std::invalid_argument("make_probe: semi_angle must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("make_probe: lambda must be > 0");

  double q_ap = semi_angle_mrad * 1e-3 / lambda;
  double q_nyquist = std::min(0.5 / grid.pitch_x, 0.5 / grid.pitch_y);
  if (q_ap > q_nyquist)
    throw std::invalid_argument("make_probe: aperture exceeds Nyquist (aliased probe)");

  ComplexField spec(grid);
  int inside = 0;
  const double pi = std::numbers::pi;
  for (int ky = 0; ky < grid.ny; ++ky) {
    double qy = grid.freq_y(ky);
    for (int kx = 0; kx < grid.nx; ++kx) {
      double qx = grid.freq_x(kx);
      double q2 = qx * qx + qy * qy;
      if (q2 <= q_ap * q_ap) {
        double arg = -pi * lambda * defocus * q2;
        spec.at(kx, ky) = cdouble(std::cos(arg), std::sin(arg));
        ++inside;
      }
    }
  }
  if (inside < 4)
    throw std::invalid_argument("make_probe: aperture disc contains fewer than 4 spectral samples");

  Probe p;
  p.grid = grid;
  p.semi_angle_mrad = semi_angle_mrad;
  p.defocus = defocus;
  p.lambda = lambda;
  p.wave = fft2(spec, FftDirection::Inverse);
  double power = total_intensity(p.wave);
  double scale = 1.0 / std::sqrt(power);
  for (cdouble& a : p.wave.v) a *= scale;
  return p;
}

ScanGrid make_scan_grid(const Grid2& det_grid, int sy, int sx) {
  if (sy < 1 || sx < 1) throw std::invalid_argument("make_scan_grid: scan counts must be >= 1");
  if (det_grid.nx % sx != 0 || det_grid.ny % sy != 0)
    throw std::invalid_argument("make_scan_grid: scan must tile the cell (N divisible by S)");
  ScanGrid s;
  s.sy = sy;
  s.sx = sx;
  s.step_px_x = det_grid.nx / sx;
  s.step_px_y = det_grid.ny / sy;
  s.step_x = s.step_px_x * det_grid.pitch_x;
  s.step_y = s.step_px_y * det_grid.pitch_y;
  return s;
}

ComplexField multislice_exitwave(const Probe& probe, int shift_px_x, int shift_px_y,
                                 const PotentialSlices& slices) {
  require_same_grid(probe.grid, slices.grid, "multislice_exitwave");
  ComplexField e = roll(probe.wave, shift_px_x, shift_px_y);
  int m = slices.n_slices();
  for (int k = 0; k < m; ++k) {
    ComplexField o = slices.transmission(k);
    for (std::size_t i = 0; i < e.v.size(); ++i) e.v[i] *= o.v[i];
    if (k + 1 < m) e = fresnel_propagate(e, slices.delta_z, slices.lambda);
  }
  return e;
}

FourDDataset simulate_4d(const PotentialSlices& slices, const SimulateParams& params,
                         const ScanGrid& scan, const std::string& structure_name) {
  if (!(params.delta_z_defocus > 0.0))
    throw std::invalid_argument("simulate_4d: delta_z_defocus must be > 0");
  const Grid2& g = slices.grid;
  if (scan.sx * scan.step_px_x != g.nx || scan.sy * scan.step_px_y != g.ny)
    throw std::invalid_argument("simulate_4d: scan does not tile the cell");

  FourDDataset ds;
  ds.det_grid = g;
  ds.scan = scan;
  ds.lambda = slices.lambda;
  ds.sigma = slices.sigma;
  ds.semi_angle_mrad = params.semi_angle_mrad;
  ds.delta_z_defocus = params.delta_z_defocus;
  ds.slice_dz = slices.delta_z;
  ds.n_slices = slices.n_slices();
  ds.structure_name = structure_name;

  const int nq = ds.n_channels();
  const std::size_t npos = std::size_t(scan.sy) * scan.sx;
  ds.i_minus.assign(nq * npos, 0.0);
  ds.i_zero.assign(nq * npos, 0.0);
  ds.i_plus.assign(nq * npos, 0.0);
  ds.phase_gt.assign(nq * npos, 0.0);
  ds.vfield_gt.assign(2 * nq * npos, 0.0);
  ds.proj_phase_gt.assign(npos, 0.0);

  // in-focus spectra kept for the wrap-robust scan-gradient labels
  std::vector<cdouble> spectra(nq * npos);

  const double defoci[3] = {-params.delta_z_defocus, 0.0, params.delta_z_defocus};
  std::vector<double>* stacks[3] = {&ds.i_minus, &ds.i_zero, &ds.i_plus};

  for (int d = 0; d < 3; ++d) {
    Probe probe = make_probe(g, params.semi_angle_mrad, defoci[d], slices.lambda);
    for (int sy = 0; sy < scan.sy; ++sy) {
      for (int sx = 0; sx < scan.sx; ++sx) {
        ComplexField e =
            multislice_exitwave(probe, sx * scan.step_px_x, sy * scan.step_px_y, slices);
        ComplexField spec = fft2(e, FftDirection::Forward);
        std::size_t pos = std::size_t(sy) * scan.sx + sx;
        for (int q = 0; q < nq; ++q) {
          double inten = std::norm(spec.v[q]);
          (*stacks[d])[std::size_t(q) * npos + pos] = inten;
          if (d == 1) spectra[std::size_t(q) * npos + pos] = spec.v[q];
        }
      }
    }
  }

  for (int q = 0; q < nq; ++q) {
    for (int sy = 0; sy < scan.sy; ++sy) {
      for (int sx = 0; sx < scan.sx; ++sx) {
        std::size_t pos = std::size_t(sy) * scan.sx + sx;
        std::size_t i = std::size_t(q) * npos + pos;
        cdouble e0 = spectra[i];
        ds.phase_gt[i] = std::arg(e0);
        std::size_t pos_xn = std::size_t(sy) * scan.sx + (sx + 1) % scan.sx;
        std::size_t pos_yn = std::size_t((sy + 1) % scan.sy) * scan.sx + sx;
        cdouble ex = spectra[std::size_t(q) * npos + pos_xn];
        cdouble ey = spectra[std::size_t(q) * npos + pos_yn];
        ds.vfield_gt[i] = std::arg(ex * std::conj(e0)) / scan.step_x;
        ds.vfield_gt[std::size_t(nq) * npos + i] = std::arg(ey * std::conj(e0)) / scan.step_y;
      }
    }
  }

  ScalarField proj = slices.projected_phase();
  for (int sy = 0; sy < scan.sy; ++sy)
    for (int sx = 0; sx < scan.sx; ++sx)
      ds.proj_phase_gt[std::size_t(sy) * scan.sx + sx] =
          proj.at(sx * scan.step_px_x, sy * scan.step_px_y);

  return ds;
}

std::vector<double> scan_carrier_phase(const Grid2& det_grid, const ScanGrid& scan) {
  const int nx = det_grid.nx, ny = det_grid.ny;
  const std::size_t npos = std::size_t(scan.sy) * scan.sx;
  std::vector<double> out(det_grid.npix() * npos);
  // raw DFT indices: for pixel-aligned shifts the phase agrees with the
  // signed-frequency convention modulo 2 pi, which is all exp(i phi) sees
  for (int ky = 0; ky < ny; ++ky) {
    for (int kx = 0; kx < nx; ++kx) {
      double* ch = out.data() + (std::size_t(ky) * nx + kx) * npos;
      for (int sy = 0; sy < scan.sy; ++sy)
        for (int sx = 0; sx < scan.sx; ++sx)
          ch[std::size_t(sy) * scan.sx + sx] =
              -2.0 * std::numbers::pi *
              (double(kx) * sx * scan.step_px_x / nx + double(ky) * sy * scan.step_px_y / ny);
    }
  }
  return out;
}

std::vector<double> axial_derivative(const std::vector<double>& i_plus,
                                     const std::vector<double>& i_minus, double delta_z) {
  if (i_plus.size() != i_minus.size())
    throw std::invalid_argument("axial_derivative: shape mismatch");
  if (!(delta_z > 0.0)) throw std::invalid_argument("axial_derivative: delta_z must be > 0");
  std::vector<double> out(i_plus.size());
  double inv = 1.0 / (2.0 * delta_z);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (i_plus[i] - i_minus[i]) * inv;
  return out;
}

Eigen::MatrixXcd probe_matrix(const Probe& probe, const ScanGrid& scan) {
  const Grid2& g = probe.grid;
  Eigen::MatrixXcd p(g.npix(), std::size_t(scan.sy) * scan.sx);
  for (int sy = 0; sy < scan.sy; ++sy) {
    for (int sx = 0; sx < scan.sx; ++sx) {
      ComplexField shifted = roll(probe.wave, sx * scan.step_px_x, sy * scan.step_px_y);
      Eigen::Index col = Eigen::Index(sy) * scan.sx + sx;
      for (std::size_t i = 0; i < shifted.v.size(); ++i) p(Eigen::Index(i), col) = shifted.v[i];
    }
  }
  return p;
}

Eigen::MatrixXcd fft_columns(const Eigen::MatrixXcd& m, const Grid2& grid, bool forward) {
  if (std::size_t(m.rows()) != grid.npix())
    throw std::invalid_argument("fft_columns: row count does not match grid");
  Eigen::MatrixXcd out(m.rows(), m.cols());
  ComplexField f(grid);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) f.v[r] = m(r, c);
    ComplexField t = fft2(f, forward ? FftDirection::Forward : FftDirection::Inverse);
    for (Eigen::Index r = 0; r < m.rows(); ++r) out(r, c) = t.v[r];
  }
  return out;
}

MatrixForward matrix_forward(const PotentialSlices& slices, const Probe& probe,
                             const ScanGrid& scan) {
  const Grid2& g = slices.grid;
  require_same_grid(probe.grid, g, "matrix_forward");
  if (g.nx > 32 || g.ny > 32)
    throw std::invalid_argument("matrix_forward: dense path restricted to N <= 32");

  const Eigen::Index n2 = Eigen::Index(g.npix());

  // dense Fresnel operator: column j = propagated delta at pixel j
  Eigen::MatrixXcd vprop(n2, n2);
  {
    ComplexField delta(g);
    for (Eigen::Index j = 0; j < n2; ++j) {
      std::fill(delta.v.begin(), delta.v.end(), cdouble(0.0, 0.0));
      delta.v[j] = 1.0;
      ComplexField col = fresnel_propagate(delta, slices.delta_z, slices.lambda);
      for (Eigen::Index r = 0; r < n2; ++r) vprop(r, j) = col.v[r];
    }
  }

  int m = slices.n_slices();
  Eigen::MatrixXcd a;
  for (int k = 0; k < m; ++k) {
    ComplexField o = slices.transmission(k);
    Eigen::VectorXcd diag(n2);
    for (Eigen::Index i = 0; i < n2; ++i) diag(i) = o.v[i];
    if (k == 0) {
      a = diag.asDiagonal().toDenseMatrix();
    } else {
      a = diag.asDiagonal() * (vprop * a).eval();
    }
  }

  MatrixForward out;
  out.p = probe_matrix(probe, scan);
  out.a = std::move(a);
  Eigen::MatrixXcd e = fft_columns(out.a * out.p, g, true);
  out.intensity = e.cwiseAbs2();
  return out;
}

}  // namespace flowtie
