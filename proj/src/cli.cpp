#include "cryomap/cli.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <tuple>

#include "CLI11.hpp"
#include "cryomap/backproject.hpp"
#include "cryomap/curve_io.hpp"
#include "cryomap/errors.hpp"
#include "cryomap/fourier.hpp"
#include "cryomap/fsc.hpp"
#include "cryomap/metadata.hpp"
#include "cryomap/mrc.hpp"
#include "cryomap/params.hpp"
#include "cryomap/phantom.hpp"
#include "cryomap/refine.hpp"
#include "cryomap/simulate.hpp"

namespace cryomap {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared parsing helpers
// ---------------------------------------------------------------------------

KernelKind parse_kernel_kind(const std::string& s) {
    if (s == "gaussian") return KernelKind::gaussian;
    if (s == "trilinear") return KernelKind::trilinear;
    throw InvalidArgument("unknown kernel kind '" + s +
                          "' (expected gaussian or trilinear)");
}

RefineMode parse_mode(const std::string& s) {
    if (s == "regularized") return RefineMode::regularized;
    if (s == "baseline_wiener") return RefineMode::baseline_wiener;
    if (s == "naive") return RefineMode::naive;
    throw InvalidArgument("unknown mode '" + s +
                          "' (expected regularized, baseline_wiener, or naive)");
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "alpha") return SweepAxis::alpha_mult;
    if (s == "beta") return SweepAxis::beta_mult;
    if (s == "gamma") return SweepAxis::gamma_mult;
    throw InvalidArgument("unknown sweep axis '" + s +
                          "' (expected alpha, beta, or gamma)");
}

double parse_num(const std::string& cell, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        throw InvalidArgument("cannot parse " + what + " value '" + cell + "'");
    return v;
}

bool parse_bool(const std::string& cell, const std::string& what) {
    if (cell == "1" || cell == "true") return true;
    if (cell == "0" || cell == "false") return false;
    throw InvalidArgument("cannot parse " + what + " value '" + cell +
                          "' (expected true/false/1/0)");
}

std::vector<double> parse_value_list(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            out.push_back(parse_num(cur, "--values entry"));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(parse_num(cur, "--values entry"));
    if (out.empty()) throw InvalidArgument("--values is empty");
    return out;
}

// Flat key=value file mirroring RefineConfig field names ('#' comments and
// blank lines are skipped).
void apply_config_file(const std::string& path, RefineConfig& c) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed;
        for (char ch : line)
            if (ch != ' ' && ch != '\t') trimmed += ch;
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) +
                             ": expected key=value");
        const std::string key = trimmed.substr(0, eq);
        const std::string val = trimmed.substr(eq + 1);
        if (key == "mode") {
            c.mode = parse_mode(val);
        } else if (key == "kernel.kind") {
            c.kernel.kind = parse_kernel_kind(val);
        } else if (key == "kernel.bandwidth") {
            c.kernel.bandwidth = parse_num(val, key);
        } else if (key == "angular_step_deg") {
            c.angular_step_deg = parse_num(val, key);
        } else if (key == "trans_radius") {
            c.trans_radius = int(parse_num(val, key));
        } else if (key == "init_lowpass_A") {
            c.init_lowpass_A = parse_num(val, key);
        } else if (key == "max_iters") {
            c.max_iters = int(parse_num(val, key));
        } else if (key == "pose_change_tol") {
            c.pose_change_tol = parse_num(val, key);
        } else if (key == "seed") {
            c.seed = std::uint64_t(parse_num(val, key));
        } else if (key == "threads") {
            c.threads = int(parse_num(val, key));
        } else if (key == "no_split") {
            c.no_split = parse_bool(val, key);
        } else if (key == "eps") {
            c.eps = parse_num(val, key);
        } else if (key == "eps_prime") {
            c.eps_prime = parse_num(val, key);
        } else if (key == "multipliers.a") {
            c.multipliers.a = parse_num(val, key);
        } else if (key == "multipliers.b") {
            c.multipliers.b = parse_num(val, key);
        } else if (key == "multipliers.g") {
            c.multipliers.g = parse_num(val, key);
        } else if (key == "inner_iters") {
            c.inner_iters = int(parse_num(val, key));
        } else if (key == "convex_mode") {
            c.convex_mode = parse_bool(val, key);
        } else if (key == "refresh") {
            if (val == "per_inner")
                c.refresh = RegConfig::Refresh::per_inner;
            else if (val == "per_m_step")
                c.refresh = RegConfig::Refresh::per_m_step;
            else
                throw InvalidArgument("config line " + std::to_string(line_no) +
                                      ": unknown refresh '" + val + "'");
        } else {
            throw InvalidArgument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
        }
    }
}

// Average each Fourier component with the conjugate of its Friedel mate.
// Slices interpolated off a rotated plane are Hermitian except along the
// Nyquist row/column (whose +n/2 mates wrap to -n/2 storage); a real image
// can only carry the Hermitian part, so project before the inverse FFT.
std::vector<cdouble> hermitian_project(const std::vector<cdouble>& f, int n) {
    std::vector<cdouble> g(f.size());
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            const std::size_t i = std::size_t(b) * n + a;
            const std::size_t m =
                std::size_t(mate_index(b, n)) * n + mate_index(a, n);
            g[i] = 0.5 * (f[i] + std::conj(f[m]));
        }
    return g;
}

// ---------------------------------------------------------------------------
// Particle stack + metadata loading
// ---------------------------------------------------------------------------

ParticleSet load_particles(const std::string& stack_path,
                           const std::string& meta_path, bool identity_ctf) {
    const ImageStack stack = read_mrc_stack(stack_path);
    const std::vector<ParticleMetaRow> rows = read_particle_meta(meta_path);
    if (rows.size() != stack.count())
        throw InvalidArgument("stack holds " + std::to_string(stack.count()) +
                              " images but metadata lists " +
                              std::to_string(rows.size()) + " rows");
    ParticleSet ps;
    ps.side_n = stack.side_n;
    ps.voxel_size = stack.voxel_size;
    ps.items.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ParticleImage& img = ps.items[i];
        img.side_n = stack.side_n;
        img.voxel_size = stack.voxel_size;
        img.f = fft2_centered(stack.images[i]);
        img.id = rows[i].id;
        Pose p;
        p.rot = rows[i].rot;
        p.tilt = rows[i].tilt;
        p.psi = rows[i].psi;
        p.shift_x = rows[i].shift_x;
        p.shift_y = rows[i].shift_y;
        img.true_pose = p;
        CTFParams ctf;
        ctf.voltage_kv = rows[i].voltage_kv;
        ctf.defocus_A = rows[i].defocus_A;
        ctf.cs_mm = rows[i].cs_mm;
        ctf.amplitude_contrast = rows[i].amplitude_contrast;
        ctf.identity_flag = identity_ctf;
        if (!identity_ctf) validate_ctf(ctf);
        img.ctf = ctf;
    }
    return ps;
}

void write_report(const RefineResult& res) {
    std::cout << "iterations=" << res.iterations << '\n'
              << "converged=" << (res.converged ? 1 : 0) << '\n'
              << "crossing_shell=" << fmt(res.resolution.crossing_shell) << '\n'
              << "freq_inv_A=" << fmt(res.resolution.freq_inv_A) << '\n'
              << "resolution_A=" << fmt(res.resolution.resolution_A) << '\n'
              << "limit_reached=" << (res.resolution.limit_reached ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Subcommand option bags
// ---------------------------------------------------------------------------

struct PhantomOpts {
    int side = 48;
    double voxel = 1.5;
    int blobs = 8;
    std::uint64_t seed = 0;
    std::string out;
};

struct SimulateOpts {
    std::string truth;
    int count = 0;
    double angular_step = 15.0;
    int trans_radius = 0;
    bool random_poses = false;
    double shift_radius = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::string kernel_kind = "gaussian";
    double kernel_h = 2.0;
    double defocus = 15000.0;
    double voltage = 300.0;
    double cs = 2.0;
    double amp_contrast = 0.07;
    bool identity_ctf = false;
    int threads = 1;
    std::string out_stack;
    std::string out_meta;
};

struct RefineOpts {
    std::string stack;
    std::string meta;
    std::string out_dir;
    std::string mode = "regularized";
    std::string config_path;
    std::string init_path;
    bool identity_ctf = false;
    bool no_split = false;
    // Flag overrides; presence tracked through CLI11 option counts.
    std::uint64_t seed = 0;
    int threads = 1;
    int max_iters = 20;
    double angular_step = 15.0;
    int trans_radius = 2;
    double init_lowpass = 0.0;
    double pose_tol = 0.01;
    double eps = 0.0;
    double eps_prime = 0.0;
    int inner_iters = 24;
    std::string kernel_kind = "gaussian";
    double kernel_h = 2.0;
};

struct ReconstructOpts {
    std::string stack;
    std::string meta;
    std::string out;
    std::string mode = "naive";
    std::string kernel_kind = "gaussian";
    double kernel_h = 2.0;
    double cutoff = -1.0;
    bool identity_ctf = false;
    int threads = 1;
};

struct FscOpts {
    std::string map_a;
    std::string map_b;
    double mask_level = 0.0;
    double mask_soft = 3.0;
    bool use_mask = false;
    double threshold = 0.143;
    std::string out_csv;
    std::string out_svg;
};

struct SweepOpts {
    RefineOpts refine;
    std::string axis = "beta";
    std::string values = "1.0,1.4,1.8,2.2";
    std::string out_table;
};

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_phantom(const PhantomOpts& o) {
    const PhantomSpec spec = random_phantom_spec(o.blobs, o.side, o.seed);
    const Volume3D v = generate_phantom(spec, o.side, o.voxel);
    write_mrc(o.out, v);
    std::cout << "wrote " << o.out << " (side=" << o.side << ", blobs=" << o.blobs
              << ")\n";
    return 0;
}

int cmd_simulate(const SimulateOpts& o) {
    if (o.count < 1) throw InvalidArgument("--count must be >= 1");
    if (o.noise_sigma < 0.0) throw InvalidArgument("--noise-sigma must be >= 0");
    const Volume3D truth = read_mrc_volume(o.truth);

    OrientationGrid grid;
    PoseSamplerSpec sampler;
    if (o.random_poses) {
        sampler.kind = PoseSamplerSpec::Kind::random;
        sampler.shift_radius = o.shift_radius;
    } else {
        grid = make_orientation_grid(truth.side_n, o.angular_step, o.trans_radius);
        sampler.kind = PoseSamplerSpec::Kind::grid;
        sampler.grid = &grid;
    }
    CTFParams ctf;
    ctf.voltage_kv = o.voltage;
    ctf.defocus_A = o.defocus;
    ctf.cs_mm = o.cs;
    ctf.amplitude_contrast = o.amp_contrast;
    ctf.identity_flag = o.identity_ctf;
    if (!o.identity_ctf) validate_ctf(ctf);
    const KernelSpec kernel{parse_kernel_kind(o.kernel_kind), o.kernel_h};

    const ParticleSet ps = simulate_particles(truth, o.count, sampler, ctf,
                                              o.noise_sigma, o.seed, kernel,
                                              o.threads);

    ImageStack stack;
    stack.side_n = ps.side_n;
    stack.voxel_size = ps.voxel_size;
    stack.images.reserve(ps.items.size());
    std::vector<ParticleMetaRow> rows;
    rows.reserve(ps.items.size());
    for (const ParticleImage& img : ps.items) {
        stack.images.push_back(ifft2_centered(hermitian_project(img.f, img.side_n),
                                              img.side_n, img.voxel_size));
        ParticleMetaRow r;
        r.id = img.id;
        const Pose& p = *img.true_pose;
        r.rot = p.rot;
        r.tilt = p.tilt;
        r.psi = p.psi;
        r.shift_x = p.shift_x;
        r.shift_y = p.shift_y;
        // The identity-CTF choice is not persisted in the schema; pass
        // --identity-ctf again to refine/reconstruct for such stacks.
        r.defocus_A = o.identity_ctf ? 0.0 : img.ctf.defocus_A;
        r.voltage_kv = img.ctf.voltage_kv;
        r.cs_mm = o.identity_ctf ? 0.0 : img.ctf.cs_mm;
        r.amplitude_contrast = o.identity_ctf ? 0.0 : img.ctf.amplitude_contrast;
        rows.push_back(r);
    }
    write_mrc(o.out_stack, stack);
    write_particle_meta(o.out_meta, rows);
    std::cout << "wrote " << o.out_stack << " (" << ps.items.size()
              << " particles) and " << o.out_meta << '\n';
    return 0;
}

RefineConfig assemble_refine_config(const RefineOpts& o, const CLI::App* sub) {
    RefineConfig c;
    if (!o.config_path.empty()) apply_config_file(o.config_path, c);
    auto passed = [&](const std::string& name) {
        return sub != nullptr && sub->count(name) > 0;
    };
    if (passed("--mode") || o.config_path.empty()) c.mode = parse_mode(o.mode);
    if (passed("--seed")) c.seed = o.seed;
    if (passed("--threads")) c.threads = o.threads;
    if (passed("--max-iters")) c.max_iters = o.max_iters;
    if (passed("--angular-step")) c.angular_step_deg = o.angular_step;
    if (passed("--trans-radius")) c.trans_radius = o.trans_radius;
    if (passed("--init-lowpass")) c.init_lowpass_A = o.init_lowpass;
    if (passed("--pose-tol")) c.pose_change_tol = o.pose_tol;
    if (passed("--eps")) c.eps = o.eps;
    if (passed("--eps-prime")) c.eps_prime = o.eps_prime;
    if (passed("--inner-iters")) c.inner_iters = o.inner_iters;
    if (passed("--kernel")) c.kernel.kind = parse_kernel_kind(o.kernel_kind);
    if (passed("--kernel-h")) c.kernel.bandwidth = o.kernel_h;
    if (o.no_split) c.no_split = true;
    return c;
}

int cmd_refine(const RefineOpts& o, const CLI::App* sub) {
    const RefineConfig config = assemble_refine_config(o, sub);
    validate_refine_config(config);
    const ParticleSet particles = load_particles(o.stack, o.meta, o.identity_ctf);
    Volume3D initial = o.init_path.empty()
                           ? Volume3D(particles.side_n, particles.voxel_size)
                           : read_mrc_volume(o.init_path);

    const RefineResult res = em_refine(particles, initial, config);

    std::error_code ec;
    std::filesystem::create_directories(o.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + o.out_dir);
    const std::string base = o.out_dir + "/";
    write_mrc(base + "map.mrc", res.volume);
    write_mrc(base + "half_a.mrc", res.half_a);
    write_mrc(base + "half_b.mrc", res.half_b);
    const std::vector<NamedCurve> curves = {{"half_map_fsc", res.half_fsc}};
    emit_curve(base + "fsc.csv", curves, CurveFormat::csv);
    emit_curve(base + "fsc.svg", curves, CurveFormat::svg);
    write_report(res);
    return 0;
}

int cmd_reconstruct(const ReconstructOpts& o) {
    const bool wiener = [&] {
        if (o.mode == "naive") return false;
        if (o.mode == "wiener") return true;
        throw InvalidArgument("unknown reconstruct mode '" + o.mode +
                              "' (expected naive or wiener)");
    }();
    const KernelSpec kernel{parse_kernel_kind(o.kernel_kind), o.kernel_h};
    const ParticleSet particles = load_particles(o.stack, o.meta, o.identity_ctf);
    if (particles.items.empty()) throw InvalidArgument("empty particle stack");

    // Grid of the distinct metadata poses and integer shifts; one delta
    // posterior per particle.
    OrientationGrid grid;
    grid.side_n = particles.side_n;
    grid.angular_step_deg = 0.0;
    grid.trans_radius = 0;
    std::map<std::tuple<double, double, double>, std::size_t> pose_ix;
    std::map<std::pair<int, int>, std::size_t> shift_ix;
    std::vector<std::pair<std::size_t, std::pair<int, int>>> assignment;
    for (const ParticleImage& img : particles.items) {
        const Pose& p = *img.true_pose;
        validate_pose(p, particles.side_n);
        const double rx = std::round(p.shift_x), ry = std::round(p.shift_y);
        if (std::abs(p.shift_x - rx) > 1e-9 || std::abs(p.shift_y - ry) > 1e-9)
            throw InvalidArgument(
                "reconstruct requires integer pixel shifts in the metadata");
        Pose key = p;
        key.shift_x = key.shift_y = 0.0;
        auto [it, inserted] =
            pose_ix.try_emplace({key.rot, key.tilt, key.psi}, grid.poses.size());
        if (inserted) grid.poses.push_back(key);
        const std::pair<int, int> sh{int(rx), int(ry)};
        auto [st, s_inserted] = shift_ix.try_emplace(sh, shift_ix.size());
        (void)st;
        assignment.push_back({it->second, sh});
    }
    grid.shifts.resize(shift_ix.size());
    for (const auto& [sh, ix] : shift_ix) grid.shifts[ix] = sh;

    std::vector<PosteriorRow> rows(particles.items.size());
    for (std::size_t i = 0; i < particles.items.size(); ++i) {
        rows[i].particle = i;
        const std::size_t cand =
            assignment[i].first * grid.n_shifts() + shift_ix.at(assignment[i].second);
        rows[i].entries = {{std::uint32_t(cand), 1.0}};
    }

    Volume3D out_map;
    if (!wiener) {
        const AccumulatorPair acc =
            backproject_accumulate(particles, rows, kernel, grid, o.cutoff, o.threads);
        out_map = ifft3_centered(naive_reconstruct(acc));
    } else {
        // Even/odd half-sets provide the per-shell correlation for the
        // Wiener-style filter of the pooled reconstruction.
        ParticleSet half[2];
        std::vector<PosteriorRow> half_rows[2];
        for (int h = 0; h < 2; ++h) {
            half[h].side_n = particles.side_n;
            half[h].voxel_size = particles.voxel_size;
        }
        for (std::size_t i = 0; i < particles.items.size(); ++i) {
            const int h = int(i % 2);
            PosteriorRow r = rows[i];
            r.particle = half[h].items.size();
            half[h].items.push_back(particles.items[i]);
            half_rows[h].push_back(r);
        }
        if (half[0].items.empty() || half[1].items.empty())
            throw InvalidArgument("wiener reconstruction needs >= 2 particles");
        const AccumulatorPair acc_a = backproject_accumulate(
            half[0], half_rows[0], kernel, grid, o.cutoff, o.threads);
        const AccumulatorPair acc_b = backproject_accumulate(
            half[1], half_rows[1], kernel, grid, o.cutoff, o.threads);
        const FSCCurve curve =
            fsc(naive_reconstruct(acc_a), naive_reconstruct(acc_b));
        const AccumulatorPair pooled = merge_accumulators(acc_a, acc_b);
        out_map = ifft3_centered(wiener_reconstruct(pooled, curve));
    }
    write_mrc(o.out, out_map);
    std::cout << "wrote " << o.out << '\n';
    return 0;
}

int cmd_fsc(const FscOpts& o) {
    Volume3D a = read_mrc_volume(o.map_a);
    Volume3D b = read_mrc_volume(o.map_b);
    if (a.side_n != b.side_n || a.voxel_size != b.voxel_size)
        throw GridMismatch("fsc: maps are on different grids");
    if (o.use_mask) {
        Volume3D ref(a.side_n, a.voxel_size);
        for (std::size_t i = 0; i < ref.data.size(); ++i)
            ref.data[i] = 0.5 * (a.data[i] + b.data[i]);
        const Mask mask = make_mask(ref, o.mask_level, o.mask_soft);
        a = apply_mask(a, mask);
        b = apply_mask(b, mask);
    }
    const FSCCurve curve = fsc(fft3_centered(a), fft3_centered(b));
    const Resolution res = resolution_at_threshold(curve, o.threshold);

    if (!o.out_csv.empty())
        emit_curve(o.out_csv, {{"fsc", curve}}, CurveFormat::csv);
    if (!o.out_svg.empty())
        emit_curve(o.out_svg, {{"fsc", curve}}, CurveFormat::svg);
    std::cout << "crossing_shell=" << fmt(res.crossing_shell) << '\n'
              << "freq_inv_A=" << fmt(res.freq_inv_A) << '\n'
              << "resolution_A=" << fmt(res.resolution_A) << '\n'
              << "limit_reached=" << (res.limit_reached ? 1 : 0) << '\n';
    return 0;
}

int cmd_sweep(const SweepOpts& o, const CLI::App* refine_like) {
    const SweepAxis axis = parse_axis(o.axis);
    const std::vector<double> values = parse_value_list(o.values);
    RefineConfig base = assemble_refine_config(o.refine, refine_like);
    if (base.mode != RefineMode::regularized)
        throw InvalidArgument("sweep requires --mode regularized");
    validate_refine_config(base);
    const ParticleSet particles =
        load_particles(o.refine.stack, o.refine.meta, o.refine.identity_ctf);
    const Volume3D initial =
        o.refine.init_path.empty()
            ? Volume3D(particles.side_n, particles.voxel_size)
            : read_mrc_volume(o.refine.init_path);

    const std::vector<RefineConfig> configs = sweep_grid(base, axis, values);
    struct Row {
        double value;
        Resolution res;
    };
    std::vector<Row> table;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const RefineResult r = em_refine(particles, initial, configs[i]);
        table.push_back({values[i], r.resolution});
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i)
        if (table[i].res.crossing_shell > table[best].res.crossing_shell) best = i;

    std::cout << "value,crossing_shell,freq_inv_A,resolution_A,limit_reached\n";
    for (const Row& r : table)
        std::cout << fmt(r.value) << ',' << fmt(r.res.crossing_shell) << ','
                  << fmt(r.res.freq_inv_A) << ',' << fmt(r.res.resolution_A) << ','
                  << (r.res.limit_reached ? 1 : 0) << '\n';
    std::cout << "best=" << fmt(table[best].value) << '\n';

    if (!o.out_table.empty()) {
        std::ofstream out(o.out_table, std::ios::trunc);
        if (!out) throw IoError("cannot open " + o.out_table);
        out << "value,crossing_shell,freq_inv_A,resolution_A,limit_reached\n";
        for (const Row& r : table)
            out << fmt(r.value) << ',' << fmt(r.res.crossing_shell) << ','
                << fmt(r.res.freq_inv_A) << ',' << fmt(r.res.resolution_A) << ','
                << (r.res.limit_reached ? 1 : 0) << '\n';
        out << "best=" << fmt(table[best].value) << '\n';
        if (!out) throw IoError("short write to " + o.out_table);
    }
    return 0;
}

void add_refine_like_options(CLI::App* sub, RefineOpts& o, bool out_dir_required) {
    sub->add_option("--stack", o.stack, "particle stack MRC")->required();
    sub->add_option("--meta", o.meta, "particle metadata CSV")->required();
    if (out_dir_required)
        sub->add_option("--out-dir", o.out_dir, "output directory")->required();
    sub->add_option("--mode", o.mode, "regularized | baseline_wiener | naive");
    sub->add_option("--config", o.config_path,
                    "key=value file mirroring the refinement config fields");
    sub->add_option("--init", o.init_path, "initial model MRC (default: zeros)");
    sub->add_flag("--identity-ctf", o.identity_ctf,
                  "treat the contrast transfer as unity (stacks from simulate "
                  "--identity-ctf)");
    sub->add_flag("--no-split", o.no_split,
                  "single refinement chain (oracle mode, no gold-standard split)");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--threads", o.threads, "worker thread cap");
    sub->add_option("--max-iters", o.max_iters, "EM iteration cap");
    sub->add_option("--angular-step", o.angular_step, "orientation step, degrees");
    sub->add_option("--trans-radius", o.trans_radius, "translation radius, pixels");
    sub->add_option("--init-lowpass", o.init_lowpass,
                    "low-pass the initial model to this resolution (Angstrom)");
    sub->add_option("--pose-tol", o.pose_tol, "pose-change convergence fraction");
    sub->add_option("--eps", o.eps, "density scale for the regularizer");
    sub->add_option("--eps-prime", o.eps_prime,
                    "gradient scale for the regularizer (default eps/3)");
    sub->add_option("--inner-iters", o.inner_iters, "solver iterations per M-step");
    sub->add_option("--kernel", o.kernel_kind, "gaussian | trilinear");
    sub->add_option("--kernel-h", o.kernel_h, "kernel bandwidth");
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"desk-scale single-particle 3D reconstruction"};
    app.require_subcommand(1);

    PhantomOpts phantom_opts;
    CLI::App* sub_phantom =
        app.add_subcommand("phantom", "generate a synthetic ground-truth volume");
    sub_phantom->add_option("--side", phantom_opts.side, "box size, voxels");
    sub_phantom->add_option("--voxel", phantom_opts.voxel, "voxel size, Angstrom");
    sub_phantom->add_option("--blobs", phantom_opts.blobs, "number of blobs");
    sub_phantom->add_option("--seed", phantom_opts.seed, "random seed");
    sub_phantom->add_option("--out", phantom_opts.out, "output MRC path")->required();

    SimulateOpts sim_opts;
    CLI::App* sub_sim =
        app.add_subcommand("simulate", "project a truth volume into a particle stack");
    sub_sim->add_option("--truth", sim_opts.truth, "truth volume MRC")->required();
    sub_sim->add_option("--count", sim_opts.count, "number of particles")->required();
    sub_sim->add_option("--angular-step", sim_opts.angular_step,
                        "grid sampler step, degrees");
    sub_sim->add_option("--trans-radius", sim_opts.trans_radius,
                        "grid sampler shift radius, pixels");
    sub_sim->add_flag("--random-poses", sim_opts.random_poses,
                      "sample poses uniformly instead of cycling the grid");
    sub_sim->add_option("--shift-radius", sim_opts.shift_radius,
                        "random sampler shift disc radius, pixels");
    sub_sim->add_option("--noise-sigma", sim_opts.noise_sigma,
                        "noise std per Fourier component");
    sub_sim->add_option("--seed", sim_opts.seed, "random seed");
    sub_sim->add_option("--kernel", sim_opts.kernel_kind, "gaussian | trilinear");
    sub_sim->add_option("--kernel-h", sim_opts.kernel_h, "kernel bandwidth");
    sub_sim->add_option("--defocus", sim_opts.defocus, "defocus, Angstrom");
    sub_sim->add_option("--voltage", sim_opts.voltage, "acceleration voltage, kV");
    sub_sim->add_option("--cs", sim_opts.cs, "spherical aberration, mm");
    sub_sim->add_option("--amp-contrast", sim_opts.amp_contrast,
                        "amplitude contrast fraction");
    sub_sim->add_flag("--identity-ctf", sim_opts.identity_ctf,
                      "no contrast transfer (records zero optics in the metadata)");
    sub_sim->add_option("--threads", sim_opts.threads, "worker thread cap");
    sub_sim->add_option("--out-stack", sim_opts.out_stack, "output stack MRC")
        ->required();
    sub_sim->add_option("--out-meta", sim_opts.out_meta, "output metadata CSV")
        ->required();

    RefineOpts refine_opts;
    CLI::App* sub_refine = app.add_subcommand(
        "refine", "EM refinement with the gold-standard split-half protocol");
    add_refine_like_options(sub_refine, refine_opts, true);

    ReconstructOpts rec_opts;
    CLI::App* sub_rec = app.add_subcommand(
        "reconstruct", "single-pass backprojection from known metadata poses");
    sub_rec->add_option("--stack", rec_opts.stack, "particle stack MRC")->required();
    sub_rec->add_option("--meta", rec_opts.meta, "particle metadata CSV")->required();
    sub_rec->add_option("--out", rec_opts.out, "output volume MRC")->required();
    sub_rec->add_option("--mode", rec_opts.mode, "naive | wiener");
    sub_rec->add_option("--kernel", rec_opts.kernel_kind, "gaussian | trilinear");
    sub_rec->add_option("--kernel-h", rec_opts.kernel_h, "kernel bandwidth");
    sub_rec->add_option("--cutoff", rec_opts.cutoff,
                        "insertion radius cutoff in shells (-1 = full)");
    sub_rec->add_flag("--identity-ctf", rec_opts.identity_ctf,
                      "treat the contrast transfer as unity");
    sub_rec->add_option("--threads", rec_opts.threads, "worker thread cap");

    FscOpts fsc_opts;
    CLI::App* sub_fsc =
        app.add_subcommand("fsc", "shell correlation between two maps");
    sub_fsc->add_option("map_a", fsc_opts.map_a, "first map MRC")->required();
    sub_fsc->add_option("map_b", fsc_opts.map_b, "second map MRC")->required();
    CLI::Option* mask_opt = sub_fsc->add_option(
        "--mask-level", fsc_opts.mask_level,
        "build a soft support mask at this density level before correlating");
    sub_fsc->add_option("--mask-soft", fsc_opts.mask_soft,
                        "mask taper width, voxels");
    sub_fsc->add_option("--threshold", fsc_opts.threshold, "resolution threshold");
    sub_fsc->add_option("--out-csv", fsc_opts.out_csv, "write the curve as CSV");
    sub_fsc->add_option("--out-svg", fsc_opts.out_svg, "write the curve as SVG");

    SweepOpts sweep_opts;
    CLI::App* sub_sweep = app.add_subcommand(
        "sweep", "refine once per regularizer multiplier value and tabulate");
    add_refine_like_options(sub_sweep, sweep_opts.refine, false);
    sub_sweep->add_option("--axis", sweep_opts.axis, "alpha | beta | gamma");
    sub_sweep->add_option("--values", sweep_opts.values,
                          "comma-separated multiplier values");
    sub_sweep->add_option("--out-table", sweep_opts.out_table,
                          "write the resolution table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sub_phantom->parsed()) return cmd_phantom(phantom_opts);
        if (sub_sim->parsed()) return cmd_simulate(sim_opts);
        if (sub_refine->parsed()) return cmd_refine(refine_opts, sub_refine);
        if (sub_rec->parsed()) return cmd_reconstruct(rec_opts);
        if (sub_fsc->parsed()) {
            fsc_opts.use_mask = mask_opt->count() > 0;
            return cmd_fsc(fsc_opts);
        }
        if (sub_sweep->parsed()) return cmd_sweep(sweep_opts, sub_sweep);
        std::cerr << "error: no subcommand given\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<std::string> with_name;
    with_name.reserve(args.size() + 1);
    with_name.push_back("cryomap");
    for (const std::string& a : args) with_name.push_back(a);
    std::vector<const char*> argv;
    argv.reserve(with_name.size());
    for (const std::string& a : with_name) argv.push_back(a.c_str());
    return cli_main(int(argv.size()), argv.data());
}

} // namespace cryomap
