#pragma once
#include <cstdint>

#include "cryomap/orientation.hpp"
#include "cryomap/particle.hpp"
#include "cryomap/slice.hpp"

namespace cryomap {

// Pose source for the simulator. `random` draws uniform rot/psi, sin-weighted
// tilt, and a uniform shift inside a disc of shift_radius pixels. `grid`
// cycles deterministically through the poses of an OrientationGrid
// (zero shifts) for oracle-style tests.
struct PoseSamplerSpec {
    enum class Kind { random, grid } kind = Kind::random;
    double shift_radius = 0.0;
    const OrientationGrid* grid = nullptr;
};

// Forward model: particle_i = CTF .* slice(truth at pose_i) + noise, where
// the noise has independent real/imag parts of std noise_sigma per component
// and exact Hermitian symmetry (drawn once per Friedel orbit). True poses are
// recorded. Deterministic given seed: every particle uses its own RNG stream
// derived from (seed, id), so thread counts cannot change the result.
ParticleSet simulate_particles(const Volume3D& truth, int n_particles,
                               const PoseSamplerSpec& sampler, const CTFParams& ctf,
                               double noise_sigma, std::uint64_t seed,
                               const KernelSpec& kernel = {KernelKind::trilinear, 2.0},
                               int threads = 1);

// Spatial frequency in 1/Angstrom of an integer component radius.
inline double freq_of_radius(double r, int side_n, double voxel_size) {
    return r / (double(side_n) * voxel_size);
}

} // namespace cryomap
