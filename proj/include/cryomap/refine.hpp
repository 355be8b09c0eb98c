#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "cryomap/backproject.hpp"
#include "cryomap/estep.hpp"
#include "cryomap/fsc.hpp"
#include "cryomap/params.hpp"
#include "cryomap/particle.hpp"
#include "cryomap/volume.hpp"

namespace cryomap {

// Deterministic disjoint equal split by a seeded shuffle of particle
// indices. Throws OddParticleCount on odd inputs.
std::pair<ParticleSet, ParticleSet> split_halves(const ParticleSet& particles,
                                                 std::uint64_t seed);

// Radial raised-cosine low-pass: unit gain up to two shells below the cutoff
// shell (side_n * voxel_size / cutoff_A), zero at and beyond it, cosine
// taper between. Throws InvalidArgument when cutoff_A <= 0.
Volume3D lowpass_filter(const Volume3D& v, double cutoff_A);

struct IterationStats {
    int iteration = 0;    // 1-based
    int cutoff_shell = 0; // frequency-marching cutoff used this iteration
    FSCCurve half_fsc;    // between the two half maps (consecutive maps when
                          // the split is disabled)
    Resolution resolution;
    double pose_change_fraction = 1.0; // particles whose best candidate moved
};

struct RefineResult {
    Volume3D volume; // combined map from the pooled final accumulators
    Volume3D half_a;
    Volume3D half_b;
    FSCCurve half_fsc; // final curve (see IterationStats::half_fsc)
    Resolution resolution;
    std::vector<IterationStats> trace;
    std::vector<PosteriorRow> posteriors; // in input particle order
    bool converged = false;
    int iterations = 0;
};

// Expectation-maximization refinement: alternates posterior estimation,
// per-shell noise re-estimation, kernel backprojection, and the volume
// update selected by config.mode, with the gold-standard split-half
// protocol and frequency marching (pose search, residuals, and insertion
// run up to the current estimated resolution + 2 shells). Convergence:
// estimated resolution unchanged AND best-candidate changes below
// pose_change_tol, both for 2 consecutive iterations; otherwise stops at
// max_iters with converged = false (best-so-far result).
RefineResult em_refine(const ParticleSet& particles, const Volume3D& initial,
                       const RefineConfig& config);

} // namespace cryomap
