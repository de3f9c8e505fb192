#ifndef FLOWTIE_FIELD_MATH_HPP
#define FLOWTIE_FIELD_MATH_HPP

#include "flowtie/field.hpp"

namespace flowtie {

enum class FftDirection { Forward, Inverse };

// Unitary 2D DFT (1/sqrt(nx*ny) each direction). Forward kernel e^{-i 2 pi q.r}.
// Arbitrary grid sizes are supported. Rejects non-finite input.
ComplexField fft2(const ComplexField& field, FftDirection dir);

// v_j = Re IFFT( i 2 pi q_j FFT(phi) ), units rad/Angstrom per rad input.
VectorField2 spectral_gradient(const ScalarField& phi);

// Adjoint-consistent with spectral_gradient: divergence(gradient(phi)) is the
// spectral Laplacian of phi.
ScalarField spectral_divergence(const VectorField2& v);

ScalarField spectral_laplacian(const ScalarField& phi);

// FFT(phi)(k) = FFT(rhs)(k) / (-4 pi^2 |k|^2 - eps) for k != 0, DC nulled.
// Result is exactly zero-mean; with eps = 0 this is the pseudo-inverse of the
// spectral Laplacian.
ScalarField poisson_solve(const ScalarField& rhs, double tikhonov_eps);

// Multiplies the spectrum by H(q) = exp(-i pi lambda |q|^2 dz). |H| = 1, so
// total intensity is conserved. dz may be negative.
ComplexField fresnel_propagate(const ComplexField& wave, double dz, double lambda);

inline double total_intensity(const ComplexField& f) {
  double s = 0.0;
  for (const cdouble& a : f.v) s += std::norm(a);
  return s;
}

}  // namespace flowtie

#endif
