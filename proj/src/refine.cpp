#include "cryomap/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cryomap/fourier.hpp"
#include "cryomap/regularizer.hpp"
#include "cryomap/rng.hpp"

namespace cryomap {

namespace {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t(0));
    Rng rng(seed, 0x5B117);
    for (std::size_t i = count; i > 1; --i) {
        const std::size_t j = std::size_t(rng.uniform_index(i));
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::size_t> a(order.begin(), order.begin() + count / 2);
    std::vector<std::size_t> b(order.begin() + count / 2, order.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return {std::move(a), std::move(b)};
}

ParticleSet take(const ParticleSet& particles, const std::vector<std::size_t>& idx) {
    ParticleSet out;
    out.side_n = particles.side_n;
    out.voxel_size = particles.voxel_size;
    out.items.reserve(idx.size());
    for (std::size_t i : idx) out.items.push_back(particles.items[i]);
    return out;
}

FSCCurve ones_curve(int side_n, double voxel_size) {
    FSCCurve c;
    c.side_n = side_n;
    c.voxel_size = voxel_size;
    c.value.assign(std::size_t(side_n / 2) + 1, 1.0);
    return c;
}

int marching_cutoff(int prev, const Resolution& res, int half) {
    const int advanced = int(std::floor(res.crossing_shell)) + 2;
    return std::min(half, std::max(prev, advanced));
}

// One half-set EM chain: model, noise spectrum, and per-particle best
// candidates from the previous iteration.
struct Chain {
    ParticleSet parts;
    std::vector<std::size_t> orig; // index into the caller's particle order
    Volume3D x;
    FourierVolume V;
    NoiseSpectrum noise;
    std::vector<PosteriorRow> rows;
    AccumulatorPair acc;
    std::vector<std::uint32_t> best;
};

} // namespace

std::pair<ParticleSet, ParticleSet> split_halves(const ParticleSet& particles,
                                                 std::uint64_t seed) {
    if (particles.items.size() % 2 != 0)
        throw OddParticleCount("split_halves: particle count must be even");
    auto [ia, ib] = split_indices(particles.items.size(), seed);
    return {take(particles, ia), take(particles, ib)};
}

Volume3D lowpass_filter(const Volume3D& v, double cutoff_A) {
    if (!(cutoff_A > 0.0)) throw InvalidArgument("lowpass cutoff must be > 0");
    const int n = v.side_n;
    const double cutoff_shell = double(n) * v.voxel_size / cutoff_A;
    FourierVolume F = fft3_centered(v);
    const double pi = 3.14159265358979323846;
    for (int c = 0; c < n; ++c) {
        const int l = signed_freq(c, n);
        for (int b = 0; b < n; ++b) {
            const int k = signed_freq(b, n);
            for (int a = 0; a < n; ++a) {
                const int h = signed_freq(a, n);
                const double r =
                    std::sqrt(double(h) * h + double(k) * k + double(l) * l);
                double w = 1.0;
                if (r >= cutoff_shell)
                    w = 0.0;
                else if (r > cutoff_shell - 2.0)
                    w = 0.5 * (1.0 + std::cos(pi * (r - (cutoff_shell - 2.0)) / 2.0));
                F.data[F.idx(a, b, c)] *= w;
            }
        }
    }
    return ifft3_centered(F);
}

RefineResult em_refine(const ParticleSet& particles, const Volume3D& initial,
                       const RefineConfig& config) {
    validate_refine_config(config);
    if (particles.items.empty())
        throw InvalidArgument("em_refine: no particles");
    if (particles.side_n != initial.side_n)
        throw GridMismatch("em_refine: particle and volume grids differ");

    const int n = particles.side_n;
    const int half_shells = n / 2;
    const OrientationGrid grid =
        make_orientation_grid(n, config.angular_step_deg, config.trans_radius);
    const double eps_prime = effective_eps_prime(config);

    Volume3D start = config.init_lowpass_A > 0.0
                         ? lowpass_filter(initial, config.init_lowpass_A)
                         : initial;

    std::vector<Chain> chains;
    if (config.no_split) {
        chains.resize(1);
        chains[0].parts = particles;
        chains[0].orig.resize(particles.items.size());
        std::iota(chains[0].orig.begin(), chains[0].orig.end(), std::size_t(0));
    } else {
        if (particles.items.size() % 2 != 0)
            throw OddParticleCount("em_refine: split requires an even count");
        auto [ia, ib] = split_indices(particles.items.size(), config.seed);
        chains.resize(2);
        chains[0].parts = take(particles, ia);
        chains[0].orig = ia;
        chains[1].parts = take(particles, ib);
        chains[1].orig = ib;
    }
    for (Chain& ch : chains) {
        ch.x = start;
        ch.V = fft3_centered(ch.x);
        ch.noise = init_noise_from_data(ch.parts);
        ch.best.assign(ch.parts.items.size(), 0);
    }

    int cutoff = half_shells;
    if (config.init_lowpass_A > 0.0) {
        const int lp_shell =
            int(std::floor(double(n) * particles.voxel_size / config.init_lowpass_A));
        cutoff = std::min(half_shells, std::max(3, lp_shell + 2));
    }

    RefineResult result;
    FSCCurve prev_curve = ones_curve(n, particles.voxel_size);
    FourierVolume prev_model; // previous combined model (no-split marching)
    int prev_res_shell = -1;
    int stable = 0;

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        std::size_t changed = 0;
        for (Chain& ch : chains) {
            ch.rows = e_step(ch.parts, ch.V, grid, config.kernel, ch.noise,
                             double(cutoff), 1e-8, config.threads);
            ch.noise = estimate_noise(ch.parts, ch.rows, ch.V, config.kernel, grid,
                                      ch.noise, double(cutoff), config.threads);
            ch.acc = backproject_accumulate(ch.parts, ch.rows, config.kernel, grid,
                                            double(cutoff), config.threads);
            switch (config.mode) {
                case RefineMode::naive:
                    ch.V = naive_reconstruct(ch.acc);
                    ch.x = ifft3_centered(ch.V);
                    break;
                case RefineMode::baseline_wiener:
                    ch.V = wiener_reconstruct(ch.acc, prev_curve);
                    ch.x = ifft3_centered(ch.V);
                    break;
                case RefineMode::regularized: {
                    const DataScales scales = scale_data(ch.acc);
                    RegConfig reg = derive_config(scales.s_y, scales.s_n, config.eps,
                                                  eps_prime, config.multipliers);
                    reg.inner_iters = config.inner_iters;
                    reg.refresh = config.refresh;
                    reg.convex_mode = config.convex_mode;
                    ch.x = m_step(ch.acc, ch.x, ch.x, reg);
                    ch.V = fft3_centered(ch.x);
                    break;
                }
            }
            for (std::size_t i = 0; i < ch.rows.size(); ++i) {
                const std::uint32_t b = ch.rows[i].best();
                if (iter == 1 || b != ch.best[i]) ++changed;
                ch.best[i] = b;
            }
        }

        FSCCurve curve;
        if (config.no_split) {
            curve = iter == 1 ? ones_curve(n, particles.voxel_size)
                              : fsc(prev_model, chains[0].V);
            prev_model = chains[0].V;
        } else {
            curve = fsc(chains[0].V, chains[1].V);
        }
        const Resolution res = resolution_at_threshold(curve, 0.143);
        const double frac = double(changed) / double(particles.items.size());

        IterationStats stats;
        stats.iteration = iter;
        stats.cutoff_shell = cutoff;
        stats.half_fsc = curve;
        stats.resolution = res;
        stats.pose_change_fraction = frac;
        result.trace.push_back(stats);
        result.iterations = iter;

        const int res_shell = int(std::floor(res.crossing_shell));
        const bool settled = iter > 1 && res_shell == prev_res_shell &&
                             frac < config.pose_change_tol;
        stable = settled ? stable + 1 : 0;
        prev_res_shell = res_shell;
        prev_curve = curve;
        cutoff = marching_cutoff(cutoff, res, half_shells);
        if (stable >= 2) {
            result.converged = true;
            break;
        }
    }

    // final combined map from the pooled accumulators of the last iteration
    AccumulatorPair merged =
        chains.size() == 2 ? merge_accumulators(chains[0].acc, chains[1].acc)
                           : chains[0].acc;
    switch (config.mode) {
        case RefineMode::naive:
            result.volume = ifft3_centered(naive_reconstruct(merged));
            break;
        case RefineMode::baseline_wiener:
            result.volume = ifft3_centered(wiener_reconstruct(merged, prev_curve));
            break;
        case RefineMode::regularized: {
            const DataScales scales = scale_data(merged);
            RegConfig reg = derive_config(scales.s_y, scales.s_n, config.eps,
                                          eps_prime, config.multipliers);
            reg.inner_iters = config.inner_iters;
            reg.refresh = config.refresh;
            reg.convex_mode = config.convex_mode;
            Volume3D pooled_init = chains[0].x;
            if (chains.size() == 2)
                for (std::size_t i = 0; i < pooled_init.data.size(); ++i)
                    pooled_init.data[i] =
                        0.5 * (chains[0].x.data[i] + chains[1].x.data[i]);
            result.volume = m_step(merged, pooled_init, pooled_init, reg);
            break;
        }
    }

    result.half_a = chains[0].x;
    result.half_b = chains.size() == 2 ? chains[1].x : chains[0].x;
    result.half_fsc = prev_curve;
    result.resolution = resolution_at_threshold(prev_curve, 0.143);
    result.posteriors.resize(particles.items.size());
    for (const Chain& ch : chains)
        for (std::size_t i = 0; i < ch.rows.size(); ++i) {
            PosteriorRow row = ch.rows[i];
            row.particle = ch.orig[i];
            result.posteriors[ch.orig[i]] = std::move(row);
        }
    return result;
}

} // namespace cryomap
