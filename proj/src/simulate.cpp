#include "cryomap/simulate.hpp"

#include <cmath>

#include "cryomap/fourier.hpp"
#include "cryomap/rng.hpp"
#include "cryomap/threading.hpp"

namespace cryomap {

namespace {

Pose draw_pose(Rng& rng, const PoseSamplerSpec& sampler, std::int64_t id) {
    Pose p;
    if (sampler.kind == PoseSamplerSpec::Kind::grid) {
        p = sampler.grid->poses[std::size_t(id) % sampler.grid->poses.size()];
        return p;
    }
    const double rad2deg = 180.0 / 3.14159265358979323846;
    p.rot = 360.0 * rng.uniform();
    p.tilt = std::acos(1.0 - 2.0 * rng.uniform()) * rad2deg; // sin-weighted
    p.psi = 360.0 * rng.uniform();
    if (sampler.shift_radius > 0.0) {
        double r = sampler.shift_radius * std::sqrt(rng.uniform());
        double th = 2.0 * 3.14159265358979323846 * rng.uniform();
        p.shift_x = r * std::cos(th);
        p.shift_y = r * std::sin(th);
    }
    return p;
}

// Adds Hermitian complex noise: one draw per Friedel orbit, mirrored to the
// mate; self-conjugate components get a real draw with the same 2 sigma^2
// per-component power.
void add_noise(std::vector<cdouble>& f, int n, double sigma, Rng& rng) {
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            const std::size_t idx = std::size_t(b) * n + a;
            const std::size_t mate =
                std::size_t(mate_index(b, n)) * n + mate_index(a, n);
            if (idx < mate) {
                cdouble z(sigma * rng.gaussian(), sigma * rng.gaussian());
                f[idx] += z;
                f[mate] += std::conj(z);
            } else if (idx == mate) {
                f[idx] += std::sqrt(2.0) * sigma * rng.gaussian();
            }
        }
}

} // namespace

ParticleSet simulate_particles(const Volume3D& truth, int n_particles,
                               const PoseSamplerSpec& sampler, const CTFParams& ctf,
                               double noise_sigma, std::uint64_t seed,
                               const KernelSpec& kernel, int threads) {
    if (noise_sigma < 0.0) throw InvalidArgument("noise_sigma must be >= 0");
    if (sampler.kind == PoseSamplerSpec::Kind::grid &&
        (sampler.grid == nullptr || sampler.grid->poses.empty()))
        throw InvalidArgument("grid pose sampler requires a non-empty grid");
    validate_ctf(ctf);
    validate_kernel(kernel);

    const int n = truth.side_n;
    const FourierVolume V = fft3_centered(truth);
    const std::vector<FreqComp> comps = frequency_components(n, -1.0);

    ParticleSet set;
    set.side_n = n;
    set.voxel_size = truth.voxel_size;
    set.items.resize(std::size_t(n_particles));

    parallel_for_chunks(std::size_t(n_particles), threads,
                        [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t p = begin; p < end; ++p) {
            ParticleImage& img = set.items[p];
            img.side_n = n;
            img.voxel_size = truth.voxel_size;
            img.ctf = ctf;
            img.id = std::int64_t(p);

            Rng rng(seed, std::uint64_t(p));
            Pose pose = draw_pose(rng, sampler, img.id);
            img.true_pose = pose;

            img.f = extract_slice(V, pose, kernel);
            for (std::size_t ci = 0; ci < comps.size(); ++ci) {
                double s = freq_of_radius(
                    std::hypot(double(comps[ci].k), double(comps[ci].l)), n,
                    truth.voxel_size);
                img.f[ci] *= ctf_value(ctf, s);
            }
            if (noise_sigma > 0.0) add_noise(img.f, n, noise_sigma, rng);
        }
    });
    return set;
}

} // namespace cryomap
