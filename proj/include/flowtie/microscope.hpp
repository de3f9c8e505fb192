#ifndef FLOWTIE_MICROSCOPE_HPP
#define FLOWTIE_MICROSCOPE_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "flowtie/field.hpp"
#include "flowtie/specimen.hpp"

namespace flowtie {

// Focused electron probe; real-space wave normalized to unit total intensity,
// spectrum zero outside the aperture disc |q| <= alpha / lambda.
struct Probe {
  Grid2 grid;
  double semi_angle_mrad = 0.0;
  double defocus = 0.0;  // Angstrom
  double lambda = 0.0;   // Angstrom
  ComplexField wave;
};

Probe make_probe(const Grid2& grid, double semi_angle_mrad, double defocus, double lambda);

// Pixel-aligned raster over the periodic cell; s * step_px must equal the
// detector pixel count so the scan tiles the cell exactly.
struct ScanGrid {
  int sy = 0, sx = 0;
  int step_px_y = 1, step_px_x = 1;
  double step_y = 0.0, step_x = 0.0;  // Angstrom (step_px * pitch)

  Grid2 grid() const { return Grid2(sx, sy, step_x, step_y); }
};

ScanGrid make_scan_grid(const Grid2& det_grid, int sy, int sx);

// Defocus-triplet 4D stacks plus ground-truth labels. Stacks are shaped
// (N^2, S_y, S_x) with index q * Sy*Sx + sy * Sx + sx; the vector-field stack
// prepends a component axis (0 = d/dx along S_x, 1 = d/dy along S_y).
struct FourDDataset {
  Grid2 det_grid;
  ScanGrid scan;
  double lambda = 0.0, sigma = 0.0;
  double semi_angle_mrad = 0.0;
  double delta_z_defocus = 0.0;
  double slice_dz = 0.0;
  int n_slices = 0;
  std::string structure_name;

  std::vector<double> i_minus, i_zero, i_plus;  // counts
  std::vector<double> phase_gt;                 // rad, principal value
  std::vector<double> vfield_gt;                // rad/Angstrom
  std::vector<double> proj_phase_gt;            // rad, on the scan grid

  int n_channels() const { return det_grid.nx * det_grid.ny; }
  std::size_t stack_size() const { return std::size_t(n_channels()) * scan.sy * scan.sx; }
  double thickness() const { return slice_dz * n_slices; }
};

// Multislice loop: E <- P shifted to the scan position, then alternately
// transmit through each slab and Fresnel-propagate by delta_z (propagator
// omitted after the last slab).
ComplexField multislice_exitwave(const Probe& probe, int shift_px_x, int shift_px_y,
                                 const PotentialSlices& slices);

struct SimulateParams {
  double semi_angle_mrad = 20.0;
  double delta_z_defocus = 50.0;  // Angstrom
};

FourDDataset simulate_4d(const PotentialSlices& slices, const SimulateParams& params,
                         const ScanGrid& scan, const std::string& structure_name);

// Known geometric phase of each diffraction channel as the probe scans:
// shifting the probe by r_hat multiplies the exit-wave spectrum by
// exp(-i 2 pi q . r_hat). Returned as a (N^2, Sy, Sx) stack; periodic spectral
// solvers recover only the residual on top of this carrier, so reconstruction
// paths restore it analytically before exit-wave assembly.
std::vector<double> scan_carrier_phase(const Grid2& det_grid, const ScanGrid& scan);

// Central difference (i_plus - i_minus) / (2 delta_z), counts/Angstrom.
std::vector<double> axial_derivative(const std::vector<double>& i_plus,
                                     const std::vector<double>& i_minus, double delta_z);

// Dense matrix formulation I = |F_2D A P|^2. Restricted to N <= 32.
struct MatrixForward {
  Eigen::MatrixXd intensity;  // N^2 x S
  Eigen::MatrixXcd a;         // N^2 x N^2
  Eigen::MatrixXcd p;         // N^2 x S
};

MatrixForward matrix_forward(const PotentialSlices& slices, const Probe& probe,
                             const ScanGrid& scan);

// Columns of the probe matrix P: vectorized pixel-rolled probe per scan position.
Eigen::MatrixXcd probe_matrix(const Probe& probe, const ScanGrid& scan);

// 2D FFT applied to each column of a matrix of vectorized fields.
Eigen::MatrixXcd fft_columns(const Eigen::MatrixXcd& m, const Grid2& grid, bool forward);

}  // namespace flowtie

#endif
