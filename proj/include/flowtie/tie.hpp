#ifndef FLOWTIE_TIE_HPP
#define FLOWTIE_TIE_HPP

#include <string>
#include <vector>

#include "flowtie/microscope.hpp"
#include "flowtie/recon.hpp"

namespace flowtie {

enum class TieVariant { Poisson, Teague };

struct TiePhaseResult {
  std::vector<double> phase;       // (N^2, Sy, Sx), zero-mean per channel
  std::vector<int> dark_channels;  // channels with mean intensity below floor
};

// Classical TIE per diffraction channel over the scan grid. For each channel q
// solve the Poisson equation with the constant-intensity approximation
//   phi(q,.) = poisson_solve(-(2 pi / lambda) i_deriv(q,.) / mean(i_zero(q,.)), eps).
// Teague's variant keeps the full div(I grad phi) form (two solves).
TiePhaseResult tie_phase(const std::vector<double>& i_zero, const std::vector<double>& i_deriv,
                         int n_channels, const ScanGrid& scan, double lambda, double eps,
                         TieVariant variant = TieVariant::Poisson);

ReconResult tie_reconstruct(const FourDDataset& ds, double eps = 0.0,
                            TieVariant variant = TieVariant::Poisson);

}  // namespace flowtie

#endif
