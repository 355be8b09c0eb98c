#include "cryomap/estep.hpp"

#include <algorithm>
#include <cmath>

#include "cryomap/ctf.hpp"
#include "cryomap/simulate.hpp"
#include "cryomap/threading.hpp"

namespace cryomap {

namespace {

double effective_cutoff(double radius_cutoff, int side_n) {
    double nyq = double(side_n / 2);
    return radius_cutoff < 0.0 ? nyq : std::min(radius_cutoff, nyq);
}

struct CompTables {
    std::vector<FreqComp> comps;
    std::vector<int> shell;      // round(|(k,l)|)
    std::vector<double> inv_sig; // 1/sigma^2(shell)
    std::vector<std::size_t> storage; // index into ParticleImage::f
};

CompTables build_comp_tables(int n, double cutoff, const NoiseSpectrum& noise) {
    CompTables t;
    t.comps = frequency_components(n, cutoff);
    t.shell.resize(t.comps.size());
    t.inv_sig.resize(t.comps.size());
    t.storage.resize(t.comps.size());
    for (std::size_t j = 0; j < t.comps.size(); ++j) {
        const FreqComp& c = t.comps[j];
        int r = int(std::lround(std::hypot(double(c.k), double(c.l))));
        t.shell[j] = r;
        t.inv_sig[j] = 1.0 / noise.sigma2[std::min<std::size_t>(r, noise.sigma2.size() - 1)];
        t.storage[j] = std::size_t(storage_index(c.l, n)) * n + storage_index(c.k, n);
    }
    return t;
}

} // namespace

double residual_sq(const ParticleImage& image, const FourierVolume& V,
                   const Pose& pose, const KernelSpec& kernel,
                   const NoiseSpectrum& noise, double radius_cutoff) {
    const int n = image.side_n;
    const double cutoff = effective_cutoff(radius_cutoff, n);
    CompTables t = build_comp_tables(n, cutoff, noise);
    std::vector<cdouble> slice(t.comps.size());
    sample_slice(V, rotation_matrix(pose), kernel, t.comps, slice.data());
    double acc = 0.0;
    for (std::size_t j = 0; j < t.comps.size(); ++j) {
        const FreqComp& c = t.comps[j];
        double s = freq_of_radius(std::hypot(double(c.k), double(c.l)), n,
                                  image.voxel_size);
        cdouble predicted = ctf_value(image.ctf, s) * slice[j] *
                            shift_phase(n, c.k, c.l, pose.shift_x, pose.shift_y);
        acc += std::norm(image.f[t.storage[j]] - predicted) * t.inv_sig[j];
    }
    return acc;
}

std::vector<PosteriorRow> e_step(const ParticleSet& particles, const FourierVolume& V,
                                 const OrientationGrid& grid, const KernelSpec& kernel,
                                 const NoiseSpectrum& noise, double radius_cutoff,
                                 double prune_floor, int threads) {
    if (grid.poses.empty() || grid.shifts.empty())
        throw InvalidArgument("e_step: empty orientation grid");
    const int n = particles.side_n;
    const double cutoff = effective_cutoff(radius_cutoff, n);
    const CompTables tab = build_comp_tables(n, cutoff, noise);
    const std::size_t ncomp = tab.comps.size();
    const std::size_t npose = grid.poses.size();
    const std::size_t nshift = grid.shifts.size();
    const double slack = 2.0 * std::log(1.0 / prune_floor);

    // rotation matrices once
    std::vector<Mat3> rots(npose);
    for (std::size_t p = 0; p < npose; ++p) rots[p] = rotation_matrix(grid.poses[p]);

    // translation phase tables per shift
    std::vector<std::vector<double>> phr(nshift), phi(nshift);
    std::size_t zero_shift = nshift;
    for (std::size_t s = 0; s < nshift; ++s) {
        phr[s].resize(ncomp);
        phi[s].resize(ncomp);
        const auto [dx, dy] = grid.shifts[s];
        if (dx == 0 && dy == 0) zero_shift = s;
        for (std::size_t j = 0; j < ncomp; ++j) {
            cdouble ph = shift_phase(n, tab.comps[j].k, tab.comps[j].l, dx, dy);
            phr[s][j] = ph.real();
            phi[s][j] = ph.imag();
        }
    }
    if (zero_shift == nshift)
        throw InvalidArgument("e_step: orientation grid lacks the zero shift");

    std::vector<PosteriorRow> rows(particles.items.size());

    // Slice cache across poses: every particle compares against the same
    // slices, so sampling them once per pose turns the hot loops below into
    // pure table sweeps. Falls back to per-block resampling when the cache
    // would not fit comfortably in memory.
    const std::size_t cache_bytes = npose * ncomp * 2 * sizeof(double);
    const bool use_cache = cache_bytes <= (std::size_t(1) << 29); // 512 MB
    std::vector<double> cache_sr, cache_si;
    if (use_cache) {
        cache_sr.resize(npose * ncomp);
        cache_si.resize(npose * ncomp);
        parallel_for_chunks(npose, threads,
                            [&](std::size_t begin, std::size_t end, int) {
            std::vector<cdouble> slice(ncomp);
            for (std::size_t ps = begin; ps < end; ++ps) {
                sample_slice(V, rots[ps], kernel, tab.comps, slice.data());
                for (std::size_t j = 0; j < ncomp; ++j) {
                    cache_sr[ps * ncomp + j] = slice[j].real();
                    cache_si[ps * ncomp + j] = slice[j].imag();
                }
            }
        });
    }

    // Particles are processed in blocks small enough that their tables stay
    // cache-resident while the pose loop streams slices past them.
    const std::size_t block = std::max<std::size_t>(
        8, std::min<std::size_t>(64, (std::size_t(1) << 20) / (32 * ncomp)));

    parallel_for_chunks(particles.items.size(), threads,
                        [&](std::size_t pbegin, std::size_t pend, int) {
        std::vector<double> A(block, 0.0);
        std::vector<double> p1r(block * ncomp), p1i(block * ncomp),
            p2(block * ncomp), pabs(block * ncomp);
        std::vector<double> R0(npose * block), LB(npose * block);
        std::vector<double> sr(ncomp), si(ncomp), t1(ncomp), t2(ncomp);
        std::vector<cdouble> slice(ncomp);
        std::vector<double> cr(ncomp), ci(ncomp);

        auto load_slice = [&](std::size_t ps, bool with_abs) {
            if (use_cache) {
                const double* __restrict csr = &cache_sr[ps * ncomp];
                const double* __restrict csi = &cache_si[ps * ncomp];
                for (std::size_t j = 0; j < ncomp; ++j) {
                    sr[j] = csr[j];
                    si[j] = csi[j];
                    t1[j] = csr[j] * csr[j] + csi[j] * csi[j];
                }
            } else {
                sample_slice(V, rots[ps], kernel, tab.comps, slice.data());
                for (std::size_t j = 0; j < ncomp; ++j) {
                    sr[j] = slice[j].real();
                    si[j] = slice[j].imag();
                    t1[j] = std::norm(slice[j]);
                }
            }
            if (with_abs)
                for (std::size_t j = 0; j < ncomp; ++j) t2[j] = std::sqrt(t1[j]);
        };

        for (std::size_t bbegin = pbegin; bbegin < pend; bbegin += block) {
            const std::size_t nloc = std::min(block, pend - bbegin);

            // per-particle tables: A, w*ctf*X (re/im), w*ctf^2, |w*ctf*X|
            for (std::size_t lp = 0; lp < nloc; ++lp) {
                const ParticleImage& img = particles.items[bbegin + lp];
                double a = 0.0;
                for (std::size_t j = 0; j < ncomp; ++j) {
                    const FreqComp& c = tab.comps[j];
                    double s = freq_of_radius(std::hypot(double(c.k), double(c.l)),
                                              n, img.voxel_size);
                    double ctf = ctf_value(img.ctf, s);
                    double w = tab.inv_sig[j];
                    cdouble x = img.f[tab.storage[j]];
                    a += w * std::norm(x);
                    std::size_t o = lp * ncomp + j;
                    p1r[o] = w * ctf * x.real();
                    p1i[o] = w * ctf * x.imag();
                    p2[o] = w * ctf * ctf;
                    pabs[o] = w * std::abs(ctf) * std::abs(x);
                }
                A[lp] = a;
            }

            // pass 1: per (pose, particle) zero-shift residual and shift-free
            // lower bound
            for (std::size_t ps = 0; ps < npose; ++ps) {
                load_slice(ps, true);
                for (std::size_t lp = 0; lp < nloc; ++lp) {
                    const double* __restrict p1r_ = &p1r[lp * ncomp];
                    const double* __restrict p1i_ = &p1i[lp * ncomp];
                    const double* __restrict p2_ = &p2[lp * ncomp];
                    const double* __restrict pa_ = &pabs[lp * ncomp];
                    double b = 0.0, cross = 0.0, absum = 0.0;
                    for (std::size_t j = 0; j < ncomp; ++j) {
                        b += p2_[j] * t1[j];
                        cross += p1r_[j] * sr[j] + p1i_[j] * si[j];
                        absum += pa_[j] * t2[j];
                    }
                    R0[ps * nloc + lp] = A[lp] + b - 2.0 * cross;
                    LB[ps * nloc + lp] = A[lp] + b - 2.0 * absum;
                }
            }

            // per-particle upper bound: best zero-shift residual (achieved,
            // since the zero shift is always a candidate)
            std::vector<double> U(nloc, 1e300);
            for (std::size_t ps = 0; ps < npose; ++ps)
                for (std::size_t lp = 0; lp < nloc; ++lp)
                    U[lp] = std::min(U[lp], R0[ps * nloc + lp]);

            // pass 2: exact residuals for surviving poses at every shift
            std::vector<std::vector<std::pair<std::uint32_t, double>>> cand(nloc);
            for (std::size_t ps = 0; ps < npose; ++ps) {
                bool pose_needed = false;
                for (std::size_t lp = 0; lp < nloc; ++lp)
                    if (LB[ps * nloc + lp] <= U[lp] + slack) {
                        pose_needed = true;
                        break;
                    }
                if (!pose_needed) continue;
                load_slice(ps, false);
                for (std::size_t lp = 0; lp < nloc; ++lp) {
                    if (LB[ps * nloc + lp] > U[lp] + slack) continue;
                    const double* __restrict p1r_ = &p1r[lp * ncomp];
                    const double* __restrict p1i_ = &p1i[lp * ncomp];
                    const double* __restrict p2_ = &p2[lp * ncomp];
                    double b = 0.0;
                    // c_j = (w ctf X_j) * conj(S_j)
                    for (std::size_t j = 0; j < ncomp; ++j) {
                        b += p2_[j] * t1[j];
                        cr[j] = p1r_[j] * sr[j] + p1i_[j] * si[j];
                        ci[j] = p1i_[j] * sr[j] - p1r_[j] * si[j];
                    }
                    const double base = A[lp] + b;
                    for (std::size_t s = 0; s < nshift; ++s) {
                        const double* __restrict pr = phr[s].data();
                        const double* __restrict pi = phi[s].data();
                        double cross = 0.0;
                        for (std::size_t j = 0; j < ncomp; ++j)
                            cross += cr[j] * pr[j] + ci[j] * pi[j];
                        cand[lp].emplace_back(std::uint32_t(ps * nshift + s),
                                              base - 2.0 * cross);
                    }
                }
            }

            // softmax with max-exponent subtraction, then prune + renormalize
            for (std::size_t lp = 0; lp < nloc; ++lp) {
                PosteriorRow& row = rows[bbegin + lp];
                row.particle = bbegin + lp;
                double res_min = 1e300;
                for (const auto& c : cand[lp]) res_min = std::min(res_min, c.second);
                double z = 0.0;
                for (const auto& c : cand[lp])
                    z += std::exp(-(c.second - res_min) / 2.0);
                double kept = 0.0;
                for (const auto& c : cand[lp]) {
                    double w = std::exp(-(c.second - res_min) / 2.0) / z;
                    if (w >= prune_floor) {
                        row.entries.emplace_back(c.first, w);
                        kept += w;
                    }
                }
                for (auto& e : row.entries) e.second /= kept;
            }
        }
    });

    return rows;
}

NoiseSpectrum estimate_noise(const ParticleSet& particles,
                             const std::vector<PosteriorRow>& posteriors,
                             const FourierVolume& V, const KernelSpec& kernel,
                             const OrientationGrid& grid, const NoiseSpectrum& prev,
                             double radius_cutoff, int threads) {
    const int n = particles.side_n;
    const double cutoff = effective_cutoff(radius_cutoff, n);
    NoiseSpectrum dummy = constant_noise(n, 1.0);
    const CompTables tab = build_comp_tables(n, cutoff, dummy);
    const std::size_t ncomp = tab.comps.size();
    const int half = n / 2;

    // group nonzero candidates by pose so each slice is sampled once
    const std::size_t nshift = grid.shifts.size();
    struct Obs {
        std::uint32_t particle;
        std::uint32_t shift;
        double weight;
    };
    std::vector<std::vector<Obs>> by_pose(grid.poses.size());
    for (const PosteriorRow& row : posteriors)
        for (const auto& [candidate, weight] : row.entries)
            by_pose[candidate / nshift].push_back(
                {std::uint32_t(row.particle), std::uint32_t(candidate % nshift), weight});

    std::vector<double> acc_sq(half + 1, 0.0), acc_w(half + 1, 0.0);
    const int workers = std::max(1, threads);
    std::vector<std::vector<double>> wsq(workers, std::vector<double>(half + 1, 0.0));
    std::vector<std::vector<double>> ww(workers, std::vector<double>(half + 1, 0.0));

    parallel_for_chunks(grid.poses.size(), workers,
                        [&](std::size_t begin, std::size_t end, int w) {
        std::vector<cdouble> slice(ncomp);
        for (std::size_t ps = begin; ps < end; ++ps) {
            if (by_pose[ps].empty()) continue;
            sample_slice(V, rotation_matrix(grid.poses[ps]), kernel, tab.comps,
                         slice.data());
            for (const Obs& ob : by_pose[ps]) {
                const ParticleImage& img = particles.items[ob.particle];
                const auto [dx, dy] = grid.shifts[ob.shift];
                for (std::size_t j = 0; j < ncomp; ++j) {
                    const FreqComp& c = tab.comps[j];
                    double s = freq_of_radius(std::hypot(double(c.k), double(c.l)), n,
                                              img.voxel_size);
                    cdouble predicted = ctf_value(img.ctf, s) * slice[j] *
                                        shift_phase(n, c.k, c.l, dx, dy);
                    double e2 = std::norm(img.f[tab.storage[j]] - predicted);
                    wsq[w][tab.shell[j]] += ob.weight * e2 * 0.5;
                    ww[w][tab.shell[j]] += ob.weight;
                }
            }
        }
    });
    for (int w = 0; w < workers; ++w)
        for (int r = 0; r <= half; ++r) {
            acc_sq[r] += wsq[w][r];
            acc_w[r] += ww[w][r];
        }

    NoiseSpectrum out = prev;
    out.sigma2.resize(half + 1, prev.sigma2.empty() ? 1.0 : prev.sigma2.back());
    for (int r = 0; r <= half; ++r)
        if (acc_w[r] > 0.0) out.sigma2[r] = std::max(acc_sq[r] / acc_w[r], 1e-12);
    return out;
}

NoiseSpectrum init_noise_from_data(const ParticleSet& particles) {
    const int n = particles.side_n;
    const int half = n / 2;
    std::vector<double> power(half + 1, 0.0), count(half + 1, 0.0);
    for (const ParticleImage& img : particles.items)
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                int k = signed_freq(a, n), l = signed_freq(b, n);
                int r = int(std::lround(std::hypot(double(k), double(l))));
                if (r > half) continue;
                power[r] += std::norm(img.f[std::size_t(b) * n + a]) * 0.5;
                count[r] += 1.0;
            }
    NoiseSpectrum ns;
    ns.sigma2.resize(half + 1, 1.0);
    for (int r = 0; r <= half; ++r)
        if (count[r] > 0.0) ns.sigma2[r] = std::max(power[r] / count[r], 1e-12);
    return ns;
}

} // namespace cryomap
