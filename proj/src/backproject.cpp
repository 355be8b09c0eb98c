#include "cryomap/backproject.hpp"

#include <algorithm>
#include <cmath>

#include "cryomap/ctf.hpp"
#include "cryomap/simulate.hpp"
#include "cryomap/threading.hpp"

namespace cryomap {

AccumulatorPair backproject_accumulate(const ParticleSet& particles,
                                       const std::vector<PosteriorRow>& posteriors,
                                       const KernelSpec& kernel,
                                       const OrientationGrid& grid,
                                       double radius_cutoff, int threads) {
    validate_kernel(kernel);
    const int n = particles.side_n;
    const int lo = -n / 2, hi = n / 2 - 1;
    const double cutoff = radius_cutoff < 0.0 ? double(n) : radius_cutoff;
    const std::vector<FreqComp> comps = frequency_components(
        n, std::min(cutoff, double(n))); // 2D components, possibly full plane
    const std::size_t nshift = grid.shifts.size();

    const int workers = std::max(1, threads);
    std::vector<AccumulatorPair> parts(workers);
    for (AccumulatorPair& a : parts) {
        a.side_n = n;
        a.voxel_size = particles.voxel_size;
        a.numerator.assign(std::size_t(n) * n * n, cdouble(0, 0));
        a.weight.assign(std::size_t(n) * n * n, 0.0);
    }

    parallel_for_chunks(posteriors.size(), workers,
                        [&](std::size_t begin, std::size_t end, int w) {
        AccumulatorPair& acc = parts[w];
        KernelTap taps[27];
        for (std::size_t ri = begin; ri < end; ++ri) {
            const PosteriorRow& row = posteriors[ri];
            const ParticleImage& img = particles.items[row.particle];
            for (const auto& [candidate, post] : row.entries) {
                if (post <= 0.0) continue;
                const std::size_t pose_idx = candidate / nshift;
                const auto [dx, dy] = grid.shifts[candidate % nshift];
                const Mat3 R = rotation_matrix(grid.poses[pose_idx]);
                for (const FreqComp& c : comps) {
                    const double s = freq_of_radius(
                        std::hypot(double(c.k), double(c.l)), n, img.voxel_size);
                    const double ctf = ctf_value(img.ctf, s);
                    // translation-corrected observation: conj(phase) * X
                    const cdouble xhat =
                        img.f[std::size_t(storage_index(c.l, n)) * n +
                              storage_index(c.k, n)] *
                        std::conj(shift_phase(n, c.k, c.l, dx, dy));
                    const auto nj = R.apply(double(c.k), double(c.l), 0.0);
                    const double njv[3] = {nj[0], nj[1], nj[2]};
                    const int count = kernel_taps(kernel, njv, taps);
                    for (int t = 0; t < count; ++t) {
                        const KernelTap& tap = taps[t];
                        if (tap.p[0] < lo || tap.p[0] > hi || tap.p[1] < lo ||
                            tap.p[1] > hi || tap.p[2] < lo || tap.p[2] > hi)
                            continue;
                        const std::size_t vi =
                            acc.idx(storage_index(tap.p[0], n),
                                    storage_index(tap.p[1], n),
                                    storage_index(tap.p[2], n));
                        const double pk = post * tap.w;
                        acc.numerator[vi] += pk * ctf * xhat;
                        acc.weight[vi] += pk * ctf * ctf;
                    }
                }
            }
        }
    });

    // deterministic merge in worker order
    AccumulatorPair out = std::move(parts[0]);
    for (int w = 1; w < workers; ++w)
        for (std::size_t i = 0; i < out.numerator.size(); ++i) {
            out.numerator[i] += parts[w].numerator[i];
            out.weight[i] += parts[w].weight[i];
        }

    // Friedel symmetrization: average each orbit with its conjugated mate
    for (int c = 0; c < n; ++c)
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                const std::size_t i = out.idx(a, b, c);
                const std::size_t m =
                    out.idx(mate_index(a, n), mate_index(b, n), mate_index(c, n));
                if (i > m) continue;
                const cdouble zn = 0.5 * (out.numerator[i] + std::conj(out.numerator[m]));
                out.numerator[i] = zn;
                out.numerator[m] = std::conj(zn);
                const double zw = 0.5 * (out.weight[i] + out.weight[m]);
                out.weight[i] = zw;
                out.weight[m] = zw;
            }
    out.finalized = true;
    return out;
}

double accumulator_symmetry_residue(const AccumulatorPair& acc) {
    const int n = acc.side_n;
    double worst = 0.0, scale = 0.0;
    for (int c = 0; c < n; ++c)
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                const std::size_t i = acc.idx(a, b, c);
                const std::size_t m =
                    acc.idx(mate_index(a, n), mate_index(b, n), mate_index(c, n));
                worst = std::max(worst,
                                 std::abs(acc.numerator[i] - std::conj(acc.numerator[m])));
                worst = std::max(worst, std::abs(acc.weight[i] - acc.weight[m]));
                scale = std::max({scale, std::abs(acc.numerator[i]), acc.weight[i]});
            }
    return scale > 0.0 ? worst / scale : 0.0;
}

FourierVolume naive_reconstruct(const AccumulatorPair& acc, double weight_floor) {
    double floor = weight_floor;
    if (floor < 0.0) {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (double w : acc.weight)
            if (w > 0.0) {
                sum += w;
                ++cnt;
            }
        floor = cnt ? 1e-6 * (sum / double(cnt)) : 0.0;
    }
    FourierVolume V(acc.side_n, acc.voxel_size);
    for (std::size_t i = 0; i < acc.weight.size(); ++i) {
        if (acc.weight[i] <= 0.0) continue;
        V.data[i] = acc.numerator[i] / std::max(acc.weight[i], floor);
    }
    return V;
}

FourierVolume wiener_reconstruct(const AccumulatorPair& acc, const FSCCurve& fsc_prev,
                                 double fsc_floor) {
    const int n = acc.side_n;
    const int half = n / 2;
    if (fsc_prev.n_shells() < half + 1)
        throw GridMismatch("wiener_reconstruct: curve has too few shells");

    // mean weight per shell over all voxels of the shell
    std::vector<double> mean_w(half + 1, 0.0);
    std::vector<double> count(half + 1, 0.0);
    for (int c = 0; c < n; ++c)
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                int h = signed_freq(a, n), k = signed_freq(b, n), l = signed_freq(c, n);
                int r = int(std::lround(std::sqrt(double(h) * h + double(k) * k +
                                                  double(l) * l)));
                if (r > half) continue;
                mean_w[r] += acc.weight[acc.idx(a, b, c)];
                count[r] += 1.0;
            }
    for (int r = 0; r <= half; ++r)
        if (count[r] > 0.0) mean_w[r] /= count[r];

    std::vector<double> lambda(half + 1, 0.0);
    for (int r = 0; r <= half; ++r) {
        double f = std::clamp(fsc_prev.value[r], fsc_floor, 1.0);
        lambda[r] = mean_w[r] * (1.0 / f - 1.0);
    }

    FourierVolume V(n, acc.voxel_size);
    for (int c = 0; c < n; ++c)
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                int h = signed_freq(a, n), k = signed_freq(b, n), l = signed_freq(c, n);
                int r = std::min(int(std::lround(std::sqrt(double(h) * h + double(k) * k +
                                                           double(l) * l))),
                                 half); // corner shells use the Nyquist values
                const std::size_t i = acc.idx(a, b, c);
                const double den = acc.weight[i] + lambda[r];
                if (den > 0.0) V.data[i] = acc.numerator[i] / den;
            }
    return V;
}

AccumulatorPair merge_accumulators(const AccumulatorPair& a, const AccumulatorPair& b) {
    if (a.side_n != b.side_n) throw GridMismatch("merge_accumulators: side_n differs");
    AccumulatorPair out = a;
    for (std::size_t i = 0; i < out.numerator.size(); ++i) {
        out.numerator[i] += b.numerator[i];
        out.weight[i] += b.weight[i];
    }
    out.finalized = a.finalized && b.finalized;
    return out;
}

} // namespace cryomap
