#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "cryomap/ctf.hpp"
#include "cryomap/pose.hpp"
#include "cryomap/volume.hpp"

namespace cryomap {

// One particle image stored as its 2D Fourier data on signed frequencies
// [k,l] (same x-fastest layout and storage indexing as FourierVolume planes).
struct ParticleImage {
    int side_n = 0;
    double voxel_size = 1.0;
    std::vector<cdouble> f; // side_n^2
    CTFParams ctf;
    std::optional<Pose> true_pose; // simulation ground truth
    std::int64_t id = 0;

    std::size_t idx(int a, int b) const { return std::size_t(b) * side_n + a; }
    cdouble at_signed(int k, int l) const {
        return f[idx(storage_index(k, side_n), storage_index(l, side_n))];
    }
    cdouble& at_signed(int k, int l) {
        return f[idx(storage_index(k, side_n), storage_index(l, side_n))];
    }
};

struct ParticleSet {
    int side_n = 0;
    double voxel_size = 1.0;
    std::vector<ParticleImage> items;
};

// Per-shell noise variance sigma^2(r), r = 0 .. side_n/2 (2D shells of the
// particle images, r = round(|k,l|)).
struct NoiseSpectrum {
    std::vector<double> sigma2;

    int n_shells() const { return int(sigma2.size()); }
};

inline NoiseSpectrum constant_noise(int side_n, double sigma2_value) {
    NoiseSpectrum ns;
    ns.sigma2.assign(std::size_t(side_n / 2) + 1, sigma2_value);
    return ns;
}

} // namespace cryomap
