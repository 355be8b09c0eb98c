#pragma once
#include <vector>

#include "cryomap/backproject.hpp"
#include "cryomap/gradient.hpp"
#include "cryomap/volume.hpp"

namespace cryomap {

// Volume update: reweighted L1 + smoothed total variation + quadratic
// restraint to the previous solution, minimized by proximal gradient
// iterations against the Fourier-diagonal measurement fit.
//
// Objective convention (L = side_n^3, X = fft3_centered(x)):
//   fit(x)  = (1/L) * (sum_n weight(n)|X(n)|^2 - 2 Re sum_n conj(num(n)) X(n))
//   surr(x) = fit + alpha*sum w_l1|x_j| + beta*sum w_tv*huber(||grad x_j||; mu)
//             + gamma*||x - anchor||^2
// The 1/L keeps the fit commensurate with the voxel-space penalties, so the
// descent step bound carries no grid-size factor. grad fit = 2*data_gradient.

struct RegConfig {
    double alpha = 0.0;       // L1 weight
    double beta = 0.0;        // TV weight
    double gamma = 0.0;       // restraint weight
    double eps = 1e-3;        // reweighting offset for |x|
    double eps_prime = 1e-3;  // reweighting offset for ||grad x||
    double mu = 1e-5;         // TV smoothing, default 0.01*eps_prime
    int inner_iters = 24;

    enum class StepRule { lipschitz, fixed } step_rule = StepRule::lipschitz;
    double fixed_step = 0.0; // used by StepRule::fixed

    enum class Refresh { per_inner, per_m_step } refresh = Refresh::per_inner;
    bool convex_mode = false; // unit weights: plain L1 + TV
};

void validate_reg_config(const RegConfig& config);

// w_l1 = 1/(|x|+eps), w_tv = 1/(||grad x||+eps_prime); both identically 1 in
// convex mode.
struct WeightFields {
    std::vector<double> w_l1;
    std::vector<double> w_tv;
};
WeightFields compute_weights(const Volume3D& x_prev, double eps, double eps_prime,
                             bool convex_mode = false);

// sum_j w_j * huber(||grad x_j||; mu), huber(g) = g^2/(2 mu) for g < mu else
// g - mu/2 (the closed-form value of the mu-smoothed dual maximization).
// Unit weights when w_tv is null.
double smoothed_tv_value(const Volume3D& v, double mu,
                         const std::vector<double>* w_tv = nullptr);

// D* applied to the per-voxel dual u_a = (D_a x)/max(mu, ||grad x||), scaled
// by w_tv. Lipschitz constant <= 12 * max(w_tv) / mu.
Volume3D smoothed_tv_gradient(const Volume3D& v, double mu,
                              const std::vector<double>* w_tv = nullptr);

// Re ifft3_centered(weight .* fft3_centered(x) - numerator): half the
// gradient of fit(x). Throws NonHermitianAccumulator when the accumulator was
// not finalized (or fails the symmetry check).
Volume3D data_gradient(const Volume3D& x, const AccumulatorPair& acc);

// Per-voxel soft threshold: 0 when |x'| < t, else x' - t*sign(x').
Volume3D prox_l1(const Volume3D& x_dash, const std::vector<double>& thresholds);

struct ObjectiveValue {
    double fit = 0.0;        // (1/L)(sum w|X|^2 - 2 Re<num, X>)
    double l1 = 0.0;         // alpha * sum w_l1 |x|
    double tv_smooth = 0.0;  // beta * sum w_tv huber(||grad x||; mu)
    double tv_linear = 0.0;  // beta * sum w_tv ||grad x|| (unsmoothed)
    double restraint = 0.0;  // gamma * ||x - anchor||^2
    double lognorm_l1 = 0.0; // alpha * sum log(|x| + eps)
    double lognorm_tv = 0.0; // beta * sum log(||grad x|| + eps_prime)

    double surrogate() const { return fit + l1 + tv_smooth + restraint; }
    double surrogate_linear() const { return fit + l1 + tv_linear + restraint; }
    double lognorm() const { return fit + lognorm_l1 + lognorm_tv + restraint; }
};

// Full breakdown at x with weights taken from x_weights_source (so the
// tangent-majorization identity is checkable at and away from the source).
ObjectiveValue penalized_objective(const Volume3D& x, const AccumulatorPair& acc,
                                   const RegConfig& config, const Volume3D& x_anchor,
                                   const Volume3D& x_weights_source);

// Frozen-weight objective around one inner iteration.
struct MStepTraceRow {
    ObjectiveValue before; // at x_i, weights of the iteration
    ObjectiveValue after;  // at x_{i+1}, same weights
    double step = 0.0;
};

// inner_iters proximal-gradient iterations from x_init, restrained to
// x_anchor. Weights refresh per config. Under the lipschitz step rule the
// frozen-weight surrogate must not increase; a relative increase > 1e-9
// throws StepDiverged.
Volume3D m_step(const AccumulatorPair& acc, const Volume3D& x_init,
                const Volume3D& x_anchor, const RegConfig& config,
                std::vector<MStepTraceRow>* trace = nullptr);

} // namespace cryomap
