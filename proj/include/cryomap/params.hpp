#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "cryomap/backproject.hpp"
#include "cryomap/kernel.hpp"
#include "cryomap/regularizer.hpp"

namespace cryomap {

// Data scales the penalty weights are calibrated against: s_y is the
// root-mean-square of ifft3(numerator/sqrt(weight)) (zero where the weight is
// zero) -- the magnitude of the whitened backprojected data -- and s_n is the
// mean accumulated weight over all voxels.
struct DataScales {
    double s_y = 0.0;
    double s_n = 0.0;
};

// Throws NonHermitianAccumulator when acc is not finalized.
DataScales scale_data(const AccumulatorPair& acc);

// Penalty multipliers relative to the data scales. The defaults sit at the
// midpoints of the ranges found to transfer across datasets: a in [0.4, 0.5]
// (times s_y*eps), b in [1.2, 2.6] (times s_y*eps_prime), g in [0.05, 0.2]
// (times s_n).
struct Multipliers {
    double a = 0.45;
    double b = 1.8;
    double g = 0.1;
};

// Builds a validated RegConfig with alpha = a*s_y*eps, beta = b*s_y*eps_prime,
// gamma = g*s_n and mu = 0.01*eps_prime. Multipliers outside the recommended
// ranges are reported through `warnings` when given. Throws NonPositiveScale
// when s_y == 0 while a or b is nonzero; InvalidArgument on negative scales
// or multipliers and on non-positive eps/eps_prime.
RegConfig derive_config(double s_y, double s_n, double eps, double eps_prime,
                        const Multipliers& mult = {},
                        std::vector<std::string>* warnings = nullptr);

enum class RefineMode { regularized, baseline_wiener, naive };

// Refinement configuration: pose search grid, EM loop controls, and the
// regularizer scales (only read in regularized mode).
struct RefineConfig {
    RefineMode mode = RefineMode::regularized;
    KernelSpec kernel;
    double angular_step_deg = 15.0;
    int trans_radius = 2;        // pixels
    double init_lowpass_A = 0.0; // 0 disables the initial low-pass
    int max_iters = 20;
    double pose_change_tol = 0.01; // fraction of best-pose changes
    std::uint64_t seed = 0;
    int threads = 1;
    bool no_split = false; // single chain, for oracle runs against ground truth

    double eps = 0.0;       // molecular density level (regularized mode)
    double eps_prime = 0.0; // 0 means "use eps/3"
    Multipliers multipliers;
    int inner_iters = 24;
    bool convex_mode = false;
    RegConfig::Refresh refresh = RegConfig::Refresh::per_inner;
};

// eps_prime if explicitly set, else eps/3.
double effective_eps_prime(const RefineConfig& config);

void validate_refine_config(const RefineConfig& config);

enum class SweepAxis { alpha_mult, beta_mult, gamma_mult };

// One config per value with the selected multiplier replaced and everything
// else shared; output order follows `values`. Throws InvalidArgument when
// `values` is empty.
std::vector<RefineConfig> sweep_grid(const RefineConfig& base, SweepAxis axis,
                                     const std::vector<double>& values);

} // namespace cryomap
