#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cryomap/fourier.hpp"
#include "cryomap/params.hpp"
#include "cryomap/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cryomap;

namespace {

std::size_t mate_index(int a, int b, int c, int n) {
    return (std::size_t((n - c) % n) * n + (n - b) % n) * n + (n - a) % n;
}

// Random finalized accumulator: weights symmetric, numerator Hermitian.
AccumulatorPair random_accumulator(int n, std::uint64_t seed) {
    AccumulatorPair acc;
    acc.side_n = n;
    acc.voxel_size = 1.2;
    acc.numerator.assign(std::size_t(n) * n * n, cdouble(0.0, 0.0));
    acc.weight.assign(acc.numerator.size(), 0.0);
    Rng rng(seed, 0xACC5);
    std::vector<cdouble> zraw(acc.numerator.size());
    std::vector<double> wraw(acc.numerator.size());
    for (std::size_t i = 0; i < zraw.size(); ++i) {
        zraw[i] = cdouble(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        wraw[i] = rng.uniform(0.0, 2.0); // some voxels effectively uncovered
    }
    for (int c = 0; c < n; ++c)
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                const std::size_t i = acc.idx(a, b, c);
                const std::size_t m = mate_index(a, b, c, n);
                const cdouble z = 0.5 * (zraw[i] + std::conj(zraw[m]));
                acc.numerator[i] = z;
                acc.numerator[m] = std::conj(z);
                const double w = 0.5 * (wraw[i] + wraw[m]);
                acc.weight[i] = w;
                acc.weight[m] = w;
            }
    acc.finalized = true;
    return acc;
}

// Independent evaluation of the data scales: explicit inverse-DFT loop over
// the whitened numerator, then RMS; mean weight by direct sum.
DataScales scale_data_direct(const AccumulatorPair& acc) {
    const int n = acc.side_n;
    const std::size_t L = acc.numerator.size();
    double acc_sq = 0.0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                cdouble sum(0.0, 0.0);
                for (int c = 0; c < n; ++c)
                    for (int b = 0; b < n; ++b)
                        for (int a = 0; a < n; ++a) {
                            const std::size_t i = acc.idx(a, b, c);
                            if (!(acc.weight[i] > 0.0)) continue;
                            const cdouble v =
                                acc.numerator[i] / std::sqrt(acc.weight[i]);
                            const double ph =
                                2.0 * oracles::kPi *
                                (double(a) * x + double(b) * y + double(c) * z) /
                                double(n);
                            sum += v * cdouble(std::cos(ph), std::sin(ph));
                        }
                sum /= double(L);
                acc_sq += std::norm(sum);
            }
    DataScales s;
    s.s_y = std::sqrt(acc_sq / double(L));
    double acc_w = 0.0;
    for (double w : acc.weight) acc_w += w;
    s.s_n = acc_w / double(L);
    return s;
}

double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

} // namespace

TEST_CASE("data scales: zero accumulator and definition unwind") {
    const int n = 6;
    AccumulatorPair zero;
    zero.side_n = n;
    zero.voxel_size = 1.0;
    zero.numerator.assign(std::size_t(n) * n * n, cdouble(0.0, 0.0));
    zero.weight.assign(zero.numerator.size(), 0.0);
    zero.finalized = true;
    DataScales s0 = scale_data(zero);
    CHECK(s0.s_y == 0.0);
    CHECK(s0.s_n == 0.0);

    zero.finalized = false;
    CHECK_THROWS_AS(scale_data(zero), NonHermitianAccumulator);

    // weight identically 1 and numerator = fft3(x) make the whitened
    // backprojection exactly x, so s_y is the RMS of x
    const int m = 8;
    Volume3D x(m, 1.0);
    Rng rng(42, 0x5CA1E);
    for (double& v : x.data) v = rng.uniform(-2.0, 2.0);
    FourierVolume F = fft3(x);
    AccumulatorPair unit;
    unit.side_n = m;
    unit.voxel_size = 1.0;
    unit.numerator = F.data;
    unit.weight.assign(F.data.size(), 1.0);
    unit.finalized = true;
    DataScales s1 = scale_data(unit);
    double rms = 0.0;
    for (double v : x.data) rms += v * v;
    rms = std::sqrt(rms / double(x.data.size()));
    CHECK(rel_diff(s1.s_y, rms) < 1e-12);
    CHECK(s1.s_n == 1.0);
}

TEST_CASE("data scales match a direct loop evaluation on seeded accumulators") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        AccumulatorPair acc = random_accumulator(6, seed);
        DataScales got = scale_data(acc);
        DataScales want = scale_data_direct(acc);
        CAPTURE(seed);
        CHECK(rel_diff(got.s_y, want.s_y) < 1e-10);
        CHECK(rel_diff(got.s_n, want.s_n) < 1e-12);
    }
}

TEST_CASE("data scales are invariant under Friedel conjugation of the input") {
    const int n = 6;
    AccumulatorPair acc = random_accumulator(n, 99);
    AccumulatorPair conj_acc = acc;
    for (int c = 0; c < n; ++c)
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                const std::size_t i = acc.idx(a, b, c);
                const std::size_t m = mate_index(a, b, c, n);
                conj_acc.numerator[i] = std::conj(acc.numerator[m]);
                conj_acc.weight[i] = acc.weight[m];
            }
    DataScales s1 = scale_data(acc);
    DataScales s2 = scale_data(conj_acc);
    CHECK(rel_diff(s1.s_y, s2.s_y) < 1e-12);
    CHECK(rel_diff(s1.s_n, s2.s_n) < 1e-14);
}

TEST_CASE("config derivation: scale formulas") {
    // alpha = a * s_y * eps
    RegConfig c1 = derive_config(1.0, 5.0, 0.1, 0.1 / 3.0, {0.5, 1.8, 0.1});
    CHECK(rel_diff(c1.alpha, 0.05) < 1e-14);

    // b = 1.8 with eps' = eps/3 is the same as 0.6 * s_y * eps
    const double s_y = 2.3, eps = 0.3;
    RegConfig c2 = derive_config(s_y, 5.0, eps, eps / 3.0, {0.45, 1.8, 0.1});
    CHECK(rel_diff(c2.beta, 0.6 * s_y * eps) < 1e-14);
    CHECK(rel_diff(c2.gamma, 0.1 * 5.0) < 1e-14);
    CHECK(c2.eps == eps);
    CHECK(c2.eps_prime == eps / 3.0);
    CHECK(rel_diff(c2.mu, 0.01 * (eps / 3.0)) < 1e-14);

    // zero multipliers produce an unregularized config
    RegConfig c3 = derive_config(1.7, 9.0, 0.2, 0.05, {0.0, 0.0, 0.0});
    CHECK(c3.alpha == 0.0);
    CHECK(c3.beta == 0.0);
    CHECK(c3.gamma == 0.0);
}

TEST_CASE("config derivation is homogeneous in the data scales") {
    Rng rng(7, 0x40B0);
    for (int trial = 0; trial < 20; ++trial) {
        const double s_y = rng.uniform(0.1, 10.0);
        const double s_n = rng.uniform(0.1, 100.0);
        const double eps = rng.uniform(0.01, 1.0);
        const double eps_prime = rng.uniform(0.01, 1.0);
        const double c = rng.uniform(0.1, 50.0);
        Multipliers mult{rng.uniform(0.05, 1.0), rng.uniform(0.5, 3.0),
                         rng.uniform(0.01, 0.5)};
        RegConfig base = derive_config(s_y, s_n, eps, eps_prime, mult);
        RegConfig scaled = derive_config(c * s_y, c * s_n, eps, eps_prime, mult);
        CHECK(rel_diff(scaled.alpha, c * base.alpha) < 1e-14);
        CHECK(rel_diff(scaled.beta, c * base.beta) < 1e-14);
        CHECK(rel_diff(scaled.gamma, c * base.gamma) < 1e-14);
    }
}

TEST_CASE("config derivation: errors and range warnings") {
    // s_y = 0 with an active L1 or TV multiplier cannot be scaled
    CHECK_THROWS_AS(derive_config(0.0, 5.0, 0.1, 0.05), NonPositiveScale);
    CHECK_THROWS_AS(derive_config(0.0, 5.0, 0.1, 0.05, {0.0, 1.0, 0.1}),
                    NonPositiveScale);
    // ... but a restraint-only config is fine
    RegConfig c = derive_config(0.0, 5.0, 0.1, 0.05, {0.0, 0.0, 0.1});
    CHECK(c.alpha == 0.0);
    CHECK(c.beta == 0.0);
    CHECK(rel_diff(c.gamma, 0.5) < 1e-14);

    CHECK_THROWS_AS(derive_config(1.0, 1.0, 0.0, 0.05), InvalidArgument);
    CHECK_THROWS_AS(derive_config(1.0, 1.0, 0.1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(derive_config(1.0, 1.0, 0.1, 0.05, {-0.1, 1.8, 0.1}),
                    InvalidArgument);
    CHECK_THROWS_AS(derive_config(-1.0, 1.0, 0.1, 0.05), InvalidArgument);

    std::vector<std::string> warnings;
    derive_config(1.0, 1.0, 0.1, 0.05, {}, &warnings);
    CHECK(warnings.empty());

    warnings.clear();
    derive_config(1.0, 1.0, 0.1, 0.05, {0.3, 3.0, 0.3}, &warnings);
    REQUIRE(int(warnings.size()) == 3);
    CHECK(warnings[0].find("alpha") != std::string::npos);
    CHECK(warnings[1].find("beta") != std::string::npos);
    CHECK(warnings[2].find("gamma") != std::string::npos);
}

TEST_CASE("refine config validation") {
    RefineConfig def;
    // regularized mode requires the density level eps
    CHECK_THROWS_AS(validate_refine_config(def), InvalidArgument);
    def.eps = 0.5;
    CHECK_NOTHROW(validate_refine_config(def));

    CHECK(effective_eps_prime(def) == def.eps / 3.0);
    def.eps_prime = 0.2;
    CHECK(effective_eps_prime(def) == 0.2);

    RefineConfig bad = def;
    bad.angular_step_deg = 0.0;
    CHECK_THROWS_AS(validate_refine_config(bad), InvalidArgument);
    bad = def;
    bad.angular_step_deg = 200.0;
    CHECK_THROWS_AS(validate_refine_config(bad), InvalidArgument);
    bad = def;
    bad.trans_radius = -1;
    CHECK_THROWS_AS(validate_refine_config(bad), InvalidArgument);
    bad = def;
    bad.max_iters = 0;
    CHECK_THROWS_AS(validate_refine_config(bad), InvalidArgument);
    bad = def;
    bad.pose_change_tol = 1.5;
    CHECK_THROWS_AS(validate_refine_config(bad), InvalidArgument);
    bad = def;
    bad.threads = 0;
    CHECK_THROWS_AS(validate_refine_config(bad), InvalidArgument);
    bad = def;
    bad.inner_iters = 0;
    CHECK_THROWS_AS(validate_refine_config(bad), InvalidArgument);

    // baseline and naive modes ignore the regularizer scales
    RefineConfig baseline;
    baseline.mode = RefineMode::baseline_wiener;
    CHECK_NOTHROW(validate_refine_config(baseline));
    RefineConfig naive;
    naive.mode = RefineMode::naive;
    CHECK_NOTHROW(validate_refine_config(naive));
}

TEST_CASE("sweep grid replaces one multiplier per value in stable order") {
    RefineConfig base;
    base.eps = 0.4;
    base.multipliers = {0.45, 1.8, 0.1};
    base.seed = 1234;

    const std::vector<double> values{1.0, 1.2, 1.4};
    std::vector<RefineConfig> beta = sweep_grid(base, SweepAxis::beta_mult, values);
    REQUIRE(int(beta.size()) == 3);
    for (std::size_t i = 0; i < beta.size(); ++i) {
        CHECK(beta[i].multipliers.b == values[i]);
        CHECK(beta[i].multipliers.a == base.multipliers.a);
        CHECK(beta[i].multipliers.g == base.multipliers.g);
        CHECK(beta[i].eps == base.eps);
        CHECK(beta[i].seed == base.seed);
        CHECK(beta[i].mode == base.mode);
    }

    std::vector<RefineConfig> alpha =
        sweep_grid(base, SweepAxis::alpha_mult, {0.4, 0.5});
    REQUIRE(int(alpha.size()) == 2);
    CHECK(alpha[0].multipliers.a == 0.4);
    CHECK(alpha[1].multipliers.a == 0.5);
    CHECK(alpha[0].multipliers.b == base.multipliers.b);

    std::vector<RefineConfig> gamma =
        sweep_grid(base, SweepAxis::gamma_mult, {0.05});
    REQUIRE(int(gamma.size()) == 1);
    CHECK(gamma[0].multipliers.g == 0.05);

    CHECK_THROWS_AS(sweep_grid(base, SweepAxis::beta_mult, {}), InvalidArgument);
}
