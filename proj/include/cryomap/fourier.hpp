#pragma once
#include "cryomap/volume.hpp"

namespace cryomap {

// Transform conventions: forward sums are unnormalized,
//   X(h,k,l) = sum_xyz x(x,y,z) exp(-2*pi*i (h*x + k*y + l*z)/n),
// the inverse carries the 1/L factor (L = n^3 or n^2), so ifft(fft(x)) = x
// and Plancherel reads sum|x|^2 = (1/L) sum|X|^2.

FourierVolume fft3(const Volume3D& v);

// Inverse transform; requires a (numerically) Hermitian input since the caller
// asks for a real volume. `tol` bounds the allowed relative imaginary residue.
Volume3D ifft3(const FourierVolume& F, double tol = 1e-8);

// Inverse transform keeping the complex field (no Hermitian requirement).
std::vector<cdouble> ifft3_complex(const FourierVolume& F);

// Largest |imag| over largest |value|; 0 for the zero field.
double imag_residue(const std::vector<cdouble>& v);

// Circular shift by n/2 along every axis; self-inverse for even n. Used to
// move the phase origin between the first voxel and the box center.
Volume3D halfshift3(const Volume3D& v);
Image2D halfshift2(const Image2D& img);

// Box-center phase origin variants used throughout the reconstruction
// pipeline (plain fft3/ifft3 put the origin at voxel [0,0,0]).
FourierVolume fft3_centered(const Volume3D& v);
Volume3D ifft3_centered(const FourierVolume& F, double tol = 1e-8);

// 2D analogues for particle images; data laid out x-fastest, length n^2.
std::vector<cdouble> fft2(const Image2D& img);
Image2D ifft2(const std::vector<cdouble>& f, int side_n, double voxel_size,
              double tol = 1e-8);
std::vector<cdouble> fft2_centered(const Image2D& img);
Image2D ifft2_centered(const std::vector<cdouble>& f, int side_n, double voxel_size,
                       double tol = 1e-8);

} // namespace cryomap
