#include "cryomap/regularizer.hpp"

#include <algorithm>
#include <cmath>

#include "cryomap/fourier.hpp"

namespace cryomap {

namespace {

double huber(double g, double mu) {
    return g < mu ? g * g / (2.0 * mu) : g - mu / 2.0;
}

double grad_norm(const GradientField& g, std::size_t i) {
    return std::sqrt(g.d1[i] * g.d1[i] + g.d2[i] * g.d2[i] + g.d3[i] * g.d3[i]);
}

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

void require_finalized(const AccumulatorPair& acc) {
    if (!acc.finalized || accumulator_symmetry_residue(acc) > 1e-9)
        throw NonHermitianAccumulator("accumulator is not Friedel-finalized");
}

} // namespace

void validate_reg_config(const RegConfig& config) {
    if (config.alpha < 0.0 || config.beta < 0.0 || config.gamma < 0.0)
        throw InvalidArgument("regularizer: alpha/beta/gamma must be >= 0");
    if (config.eps <= 0.0 || config.eps_prime <= 0.0 || config.mu <= 0.0)
        throw InvalidArgument("regularizer: eps/eps_prime/mu must be > 0");
    if (config.inner_iters < 1)
        throw InvalidArgument("regularizer: inner_iters must be >= 1");
    if (config.step_rule == RegConfig::StepRule::fixed && config.fixed_step <= 0.0)
        throw InvalidArgument("regularizer: fixed step must be > 0");
}

WeightFields compute_weights(const Volume3D& x_prev, double eps, double eps_prime,
                             bool convex_mode) {
    const std::size_t L = x_prev.data.size();
    WeightFields w;
    if (convex_mode) {
        w.w_l1.assign(L, 1.0);
        w.w_tv.assign(L, 1.0);
        return w;
    }
    w.w_l1.resize(L);
    w.w_tv.resize(L);
    for (std::size_t i = 0; i < L; ++i) w.w_l1[i] = 1.0 / (std::abs(x_prev.data[i]) + eps);
    GradientField g = discrete_gradient(x_prev);
    for (std::size_t i = 0; i < L; ++i) w.w_tv[i] = 1.0 / (grad_norm(g, i) + eps_prime);
    return w;
}

double smoothed_tv_value(const Volume3D& v, double mu,
                         const std::vector<double>* w_tv) {
    GradientField g = discrete_gradient(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        double h = huber(grad_norm(g, i), mu);
        acc += w_tv ? (*w_tv)[i] * h : h;
    }
    return acc;
}

Volume3D smoothed_tv_gradient(const Volume3D& v, double mu,
                              const std::vector<double>* w_tv) {
    GradientField g = discrete_gradient(v);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        double scale = 1.0 / std::max(mu, grad_norm(g, i));
        if (w_tv) scale *= (*w_tv)[i];
        g.d1[i] *= scale;
        g.d2[i] *= scale;
        g.d3[i] *= scale;
    }
    Volume3D out = gradient_adjoint(g);
    out.voxel_size = v.voxel_size;
    return out;
}

Volume3D data_gradient(const Volume3D& x, const AccumulatorPair& acc) {
    if (x.side_n != acc.side_n) throw GridMismatch("data_gradient: side_n differs");
    require_finalized(acc);
    FourierVolume F = fft3_centered(x);
    for (std::size_t i = 0; i < F.data.size(); ++i)
        F.data[i] = acc.weight[i] * F.data[i] - acc.numerator[i];
    // The spectrum is Hermitian by construction (the accumulator passed the
    // symmetry check above and x is real), but near a perfect data fit it is
    // all roundoff, where a relative imaginary-residue test is meaningless.
    // Take the real part of the unchecked inverse instead.
    std::vector<cdouble> inv = ifft3_complex(F);
    Volume3D g(x.side_n, x.voxel_size);
    for (std::size_t i = 0; i < inv.size(); ++i) g.data[i] = inv[i].real();
    return halfshift3(g);
}

Volume3D prox_l1(const Volume3D& x_dash, const std::vector<double>& thresholds) {
    Volume3D out = x_dash;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double x = out.data[i], t = thresholds[i];
        out.data[i] = std::abs(x) <= t ? 0.0 : x - std::copysign(t, x);
    }
    return out;
}

namespace {

double fit_value(const Volume3D& x, const AccumulatorPair& acc) {
    FourierVolume F = fft3_centered(x);
    double quad = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < F.data.size(); ++i) {
        quad += acc.weight[i] * std::norm(F.data[i]);
        cross += acc.numerator[i].real() * F.data[i].real() +
                 acc.numerator[i].imag() * F.data[i].imag();
    }
    return (quad - 2.0 * cross) / double(x.data.size());
}

ObjectiveValue objective_with_weights(const Volume3D& x, const AccumulatorPair& acc,
                                      const RegConfig& config, const Volume3D& anchor,
                                      const WeightFields& w) {
    ObjectiveValue o;
    o.fit = fit_value(x, acc);
    GradientField g = discrete_gradient(x);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double ax = std::abs(x.data[i]);
        const double gn = grad_norm(g, i);
        o.l1 += w.w_l1[i] * ax;
        o.tv_smooth += w.w_tv[i] * huber(gn, config.mu);
        o.tv_linear += w.w_tv[i] * gn;
        o.lognorm_l1 += std::log(ax + config.eps);
        o.lognorm_tv += std::log(gn + config.eps_prime);
        const double d = x.data[i] - anchor.data[i];
        o.restraint += d * d;
    }
    o.l1 *= config.alpha;
    o.tv_smooth *= config.beta;
    o.tv_linear *= config.beta;
    o.lognorm_l1 *= config.alpha;
    o.lognorm_tv *= config.beta;
    o.restraint *= config.gamma;
    return o;
}

} // namespace

ObjectiveValue penalized_objective(const Volume3D& x, const AccumulatorPair& acc,
                                   const RegConfig& config, const Volume3D& x_anchor,
                                   const Volume3D& x_weights_source) {
    validate_reg_config(config);
    require_finalized(acc);
    return objective_with_weights(
        x, acc, config, x_anchor,
        compute_weights(x_weights_source, config.eps, config.eps_prime,
                        config.convex_mode));
}

Volume3D m_step(const AccumulatorPair& acc, const Volume3D& x_init,
                const Volume3D& x_anchor, const RegConfig& config,
                std::vector<MStepTraceRow>* trace) {
    validate_reg_config(config);
    require_finalized(acc);
    if (x_init.side_n != acc.side_n || x_anchor.side_n != acc.side_n)
        throw GridMismatch("m_step: side_n differs");

    const bool lipschitz = config.step_rule == RegConfig::StepRule::lipschitz;
    const double max_weight = max_of(acc.weight);
    Volume3D x = x_init;
    WeightFields w;

    for (int iter = 0; iter < config.inner_iters; ++iter) {
        if (iter == 0 || config.refresh == RegConfig::Refresh::per_inner)
            w = compute_weights(x, config.eps, config.eps_prime, config.convex_mode);

        double l_r = config.fixed_step;
        if (lipschitz)
            l_r = 1.0 / (2.0 * max_weight + 2.0 * config.gamma +
                         12.0 * config.beta * max_of(w.w_tv) / config.mu);

        const bool audit = lipschitz || trace;
        ObjectiveValue before;
        if (audit) before = objective_with_weights(x, acc, config, x_anchor, w);

        Volume3D grad = data_gradient(x, acc);
        Volume3D tvg;
        if (config.beta > 0.0) tvg = smoothed_tv_gradient(x, config.mu, &w.w_tv);
        Volume3D next(x.side_n, x.voxel_size);
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            double gsum = 2.0 * grad.data[i] +
                          2.0 * config.gamma * (x.data[i] - x_anchor.data[i]);
            if (config.beta > 0.0) gsum += config.beta * tvg.data[i];
            next.data[i] = x.data[i] - l_r * gsum;
        }
        if (config.alpha > 0.0) {
            std::vector<double> thresholds(w.w_l1.size());
            for (std::size_t i = 0; i < thresholds.size(); ++i)
                thresholds[i] = l_r * config.alpha * w.w_l1[i];
            next = prox_l1(next, thresholds);
        }

        if (audit) {
            ObjectiveValue after = objective_with_weights(next, acc, config, x_anchor, w);
            if (lipschitz) {
                const double slack =
                    1e-9 * std::max(1.0, std::abs(before.surrogate()));
                if (after.surrogate() > before.surrogate() + slack)
                    throw StepDiverged("m_step: frozen-weight objective increased");
            }
            if (trace) trace->push_back({before, after, l_r});
        }
        x = std::move(next);
    }
    return x;
}

} // namespace cryomap
