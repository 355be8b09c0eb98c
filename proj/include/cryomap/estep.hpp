#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "cryomap/kernel.hpp"
#include "cryomap/orientation.hpp"
#include "cryomap/particle.hpp"
#include "cryomap/slice.hpp"

namespace cryomap {

// Sparse posterior over grid candidates for one particle. Entries hold
// (candidate index, weight) with weight >= prune_floor; omitted candidates
// are exact zeros. Weights of a row sum to 1.
struct PosteriorRow {
    std::size_t particle = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;

    double sum() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.second;
        return s;
    }
    std::uint32_t best() const {
        std::uint32_t arg = 0;
        double w = -1.0;
        for (const auto& e : entries)
            if (e.second > w) {
                w = e.second;
                arg = e.first;
            }
        return arg;
    }
};

// Whitened squared distance between the image and the CTF-modulated,
// translated slice of V at the pose: sum_j |X_j - CTF_j S_j ph_j|^2/sigma^2(r_j)
// over components with round(|(k,l)|) <= radius_cutoff (negative: Nyquist).
double residual_sq(const ParticleImage& image, const FourierVolume& V,
                   const Pose& pose, const KernelSpec& kernel,
                   const NoiseSpectrum& noise, double radius_cutoff = -1.0);

// Posterior weights proportional to exp(-residual_sq/2), normalized per
// particle over all grid candidates (max-exponent subtraction for
// stability); entries below prune_floor become exact zeros and the row is
// renormalized. Internally prunes pose blocks with a lower bound that is
// exact-safe: no candidate that would end up >= prune_floor is dropped.
std::vector<PosteriorRow> e_step(const ParticleSet& particles, const FourierVolume& V,
                                 const OrientationGrid& grid, const KernelSpec& kernel,
                                 const NoiseSpectrum& noise,
                                 double radius_cutoff = -1.0, double prune_floor = 1e-8,
                                 int threads = 1);

// Posterior-weighted mean of |residual|^2/2 per component over each 2D shell
// r <= radius_cutoff (floored at 1e-12); shells beyond the cutoff keep the
// previous spectrum's values.
NoiseSpectrum estimate_noise(const ParticleSet& particles,
                             const std::vector<PosteriorRow>& posteriors,
                             const FourierVolume& V, const KernelSpec& kernel,
                             const OrientationGrid& grid, const NoiseSpectrum& prev,
                             double radius_cutoff = -1.0, int threads = 1);

// Starting spectrum before any model exists: per-shell mean of |X|^2/2 over
// the data itself.
NoiseSpectrum init_noise_from_data(const ParticleSet& particles);

} // namespace cryomap
