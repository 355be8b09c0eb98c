#pragma once
#include "cryomap/volume.hpp"

namespace cryomap {

// Boundary handling for the backward-difference operator D. Replicate
// (zero-flux) is the production rule: constant volumes have zero gradient.
// Periodic exists only so the Fourier-multiplier identity of |D|^2 is exact.
enum class BoundaryMode { replicate, periodic };

// Backward differences per axis: d1(i,j,k) = x(i,j,k) - x(i-1,j,k), etc.
GradientField discrete_gradient(const Volume3D& v,
                                BoundaryMode mode = BoundaryMode::replicate);

// Adjoint D* of discrete_gradient under the same boundary rule:
// <Dx, g> = <x, D*g> for all x, g.
Volume3D gradient_adjoint(const GradientField& g,
                          BoundaryMode mode = BoundaryMode::replicate);

// Exact Fourier multiplier of |D|^2 under periodic extension:
// m(h,k,l) = 4 [sin^2(pi h/n) + sin^2(pi k/n) + sin^2(pi l/n)].
double gradient_fourier_multiplier(int h, int k, int l, int side_n);

} // namespace cryomap
