#include "cryomap/params.hpp"

#include <cmath>

#include "cryomap/fourier.hpp"

namespace cryomap {

DataScales scale_data(const AccumulatorPair& acc) {
    if (!acc.finalized)
        throw NonHermitianAccumulator("scale_data: accumulator is not finalized");
    FourierVolume whitened(acc.side_n, acc.voxel_size);
    for (std::size_t i = 0; i < acc.weight.size(); ++i)
        whitened.data[i] = acc.weight[i] > 0.0
                               ? acc.numerator[i] / std::sqrt(acc.weight[i])
                               : cdouble(0.0, 0.0);
    Volume3D y = ifft3(whitened);
    DataScales s;
    double acc_sq = 0.0;
    for (double v : y.data) acc_sq += v * v;
    s.s_y = std::sqrt(acc_sq / double(y.data.size()));
    double acc_w = 0.0;
    for (double w : acc.weight) acc_w += w;
    s.s_n = acc_w / double(acc.weight.size());
    return s;
}

namespace {

void warn_range(std::vector<std::string>* warnings, const char* name, double value,
                double lo, double hi) {
    if (!warnings || (value >= lo && value <= hi)) return;
    warnings->push_back(std::string(name) + " multiplier " + std::to_string(value) +
                        " outside recommended [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
}

} // namespace

RegConfig derive_config(double s_y, double s_n, double eps, double eps_prime,
                        const Multipliers& mult, std::vector<std::string>* warnings) {
    if (s_y < 0.0 || s_n < 0.0)
        throw InvalidArgument("derive_config: data scales must be >= 0");
    if (!(eps > 0.0) || !(eps_prime > 0.0))
        throw InvalidArgument("derive_config: eps and eps_prime must be > 0");
    if (mult.a < 0.0 || mult.b < 0.0 || mult.g < 0.0)
        throw InvalidArgument("derive_config: multipliers must be >= 0");
    if (s_y == 0.0 && (mult.a > 0.0 || mult.b > 0.0))
        throw NonPositiveScale("derive_config: s_y is zero but the L1/TV "
                               "multipliers are nonzero");
    warn_range(warnings, "alpha", mult.a, 0.4, 0.5);
    warn_range(warnings, "beta", mult.b, 1.2, 2.6);
    warn_range(warnings, "gamma", mult.g, 0.05, 0.2);

    RegConfig config;
    config.alpha = mult.a * s_y * eps;
    config.beta = mult.b * s_y * eps_prime;
    config.gamma = mult.g * s_n;
    config.eps = eps;
    config.eps_prime = eps_prime;
    config.mu = 0.01 * eps_prime;
    validate_reg_config(config);
    return config;
}

double effective_eps_prime(const RefineConfig& config) {
    return config.eps_prime > 0.0 ? config.eps_prime : config.eps / 3.0;
}

void validate_refine_config(const RefineConfig& config) {
    validate_kernel(config.kernel);
    if (!(config.angular_step_deg > 0.0) || config.angular_step_deg > 180.0)
        throw InvalidArgument("angular_step_deg must be in (0, 180]");
    if (config.trans_radius < 0)
        throw InvalidArgument("trans_radius must be >= 0");
    if (config.init_lowpass_A < 0.0)
        throw InvalidArgument("init_lowpass_A must be >= 0");
    if (config.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    if (config.pose_change_tol < 0.0 || config.pose_change_tol > 1.0)
        throw InvalidArgument("pose_change_tol must be in [0, 1]");
    if (config.threads < 1) throw InvalidArgument("threads must be >= 1");
    if (config.mode == RefineMode::regularized) {
        if (!(config.eps > 0.0))
            throw InvalidArgument("regularized mode requires eps > 0 (the "
                                  "molecular density level)");
        if (config.eps_prime < 0.0)
            throw InvalidArgument("eps_prime must be >= 0");
        if (config.multipliers.a < 0.0 || config.multipliers.b < 0.0 ||
            config.multipliers.g < 0.0)
            throw InvalidArgument("multipliers must be >= 0");
        if (config.inner_iters < 1)
            throw InvalidArgument("inner_iters must be >= 1");
    }
}

std::vector<RefineConfig> sweep_grid(const RefineConfig& base, SweepAxis axis,
                                     const std::vector<double>& values) {
    if (values.empty()) throw InvalidArgument("sweep_grid: values is empty");
    std::vector<RefineConfig> out;
    out.reserve(values.size());
    for (double v : values) {
        RefineConfig c = base;
        switch (axis) {
            case SweepAxis::alpha_mult: c.multipliers.a = v; break;
            case SweepAxis::beta_mult: c.multipliers.b = v; break;
            case SweepAxis::gamma_mult: c.multipliers.g = v; break;
        }
        out.push_back(c);
    }
    return out;
}

} // namespace cryomap
