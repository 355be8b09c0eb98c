#pragma once
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "cryomap/errors.hpp"

namespace cryomap {

using cdouble = std::complex<double>;

// Real-space cubic volume. Layout is x-fastest: flat index (i,j,k) = (k*n + j)*n + i.
// side_n must be >= 4 and even (Friedel mates and shell bookkeeping assume it).
struct Volume3D {
    int side_n = 0;
    double voxel_size = 1.0; // Angstrom per voxel
    std::vector<double> data;

    Volume3D() = default;
    Volume3D(int n, double vx)
        : side_n(n), voxel_size(vx), data(std::size_t(n) * n * n, 0.0) {}

    std::size_t size() const { return data.size(); }
    std::size_t idx(int i, int j, int k) const {
        return (std::size_t(k) * side_n + j) * side_n + i;
    }
    double& at(int i, int j, int k) { return data[idx(i, j, k)]; }
    double at(int i, int j, int k) const { return data[idx(i, j, k)]; }
};

// Map a storage index s in [0,n) to its signed frequency in [-n/2, n/2).
inline int signed_freq(int s, int n) { return s < n / 2 ? s : s - n; }
// Map a signed frequency h in [-n/2, n/2) to its storage index.
inline int storage_index(int h, int n) { return h >= 0 ? h : h + n; }
// Storage index of the Friedel mate (negated frequency) along one axis.
inline int mate_index(int s, int n) { return s == 0 ? 0 : n - s; }

// Fourier-space cubic grid over signed frequencies [h,k,l], each in [-n/2, n/2).
// Same flat layout as Volume3D, addressed through storage indices.
struct FourierVolume {
    int side_n = 0;
    double voxel_size = 1.0; // Angstrom per voxel of the originating volume
    std::vector<cdouble> data;

    FourierVolume() = default;
    FourierVolume(int n, double vx)
        : side_n(n), voxel_size(vx), data(std::size_t(n) * n * n, cdouble(0.0, 0.0)) {}

    std::size_t size() const { return data.size(); }
    std::size_t idx(int a, int b, int c) const { // storage indices
        return (std::size_t(c) * side_n + b) * side_n + a;
    }
    cdouble& at_storage(int a, int b, int c) { return data[idx(a, b, c)]; }
    cdouble at_storage(int a, int b, int c) const { return data[idx(a, b, c)]; }
    cdouble& at_signed(int h, int k, int l) {
        return data[idx(storage_index(h, side_n), storage_index(k, side_n),
                        storage_index(l, side_n))];
    }
    cdouble at_signed(int h, int k, int l) const {
        return data[idx(storage_index(h, side_n), storage_index(k, side_n),
                        storage_index(l, side_n))];
    }
};

// Three per-axis difference grids (same layout as Volume3D).
struct GradientField {
    int side_n = 0;
    std::vector<double> d1, d2, d3; // along x, y, z

    GradientField() = default;
    explicit GradientField(int n)
        : side_n(n),
          d1(std::size_t(n) * n * n, 0.0),
          d2(std::size_t(n) * n * n, 0.0),
          d3(std::size_t(n) * n * n, 0.0) {}
};

// Real-space square image, x-fastest: flat index (i,j) = j*n + i.
struct Image2D {
    int side_n = 0;
    double voxel_size = 1.0;
    std::vector<double> data;

    Image2D() = default;
    Image2D(int n, double vx)
        : side_n(n), voxel_size(vx), data(std::size_t(n) * n, 0.0) {}

    std::size_t idx(int i, int j) const { return std::size_t(j) * side_n + i; }
    double& at(int i, int j) { return data[idx(i, j)]; }
    double at(int i, int j) const { return data[idx(i, j)]; }
};

inline void require_even_side(int side_n) {
    if (side_n < 4 || side_n % 2 != 0)
        throw InvalidArgument("side_n must be even and >= 4, got " + std::to_string(side_n));
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const std::vector<cdouble>& v) {
    for (const cdouble& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

} // namespace cryomap
