#pragma once
#include <vector>

#include "cryomap/estep.hpp"
#include "cryomap/fsc.hpp"

namespace cryomap {

// Kernel-regression normal-equation accumulators:
//   numerator(n) = sum P * K * CTF_j * Xhat_j   (Xhat: shift-corrected image)
//   weight(n)    = sum P * K * CTF_j^2
// summed over particles, nonzero-posterior candidates, components, and
// in-grid window taps. Finalization applies Friedel symmetrization so the
// numerator is Hermitian and the weight centrosymmetric.
struct AccumulatorPair {
    int side_n = 0;
    double voxel_size = 1.0;
    std::vector<cdouble> numerator;
    std::vector<double> weight;
    bool finalized = false;

    std::size_t idx(int a, int b, int c) const {
        return (std::size_t(c) * side_n + b) * side_n + a;
    }
};

AccumulatorPair backproject_accumulate(const ParticleSet& particles,
                                       const std::vector<PosteriorRow>& posteriors,
                                       const KernelSpec& kernel,
                                       const OrientationGrid& grid,
                                       double radius_cutoff = -1.0, int threads = 1);

// Max deviation from numerator Hermitian symmetry / weight centrosymmetry,
// relative to the largest accumulator magnitude.
double accumulator_symmetry_residue(const AccumulatorPair& acc);

// V(n) = numerator(n)/max(weight(n), weight_floor); zero-weight voxels are 0.
// weight_floor < 0 selects the default 1e-6 * mean positive weight.
FourierVolume naive_reconstruct(const AccumulatorPair& acc, double weight_floor = -1.0);

// Traditional per-shell regularized baseline:
// V(n) = numerator(n) / (weight(n) + mean_shell_weight(r) * (1/FSC(r) - 1)),
// FSC values clamped to [fsc_floor, 1]; shell means are taken over all
// voxels of each shell. With FSC == 1 this reduces to naive_reconstruct
// with a zero floor.
FourierVolume wiener_reconstruct(const AccumulatorPair& acc, const FSCCurve& fsc_prev,
                                 double fsc_floor = 1e-3);

// Sum of two accumulators over the same grid (used to pool half-set
// accumulators for a final combined map).
AccumulatorPair merge_accumulators(const AccumulatorPair& a, const AccumulatorPair& b);

} // namespace cryomap
