#include <sys/wait.h>

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cryomap/curve_io.hpp"
#include "cryomap/errors.hpp"
#include "cryomap/metadata.hpp"
#include "cryomap/mrc.hpp"
#include "cryomap/rng.hpp"
#include "cryomap/volume.hpp"
#include "doctest.h"

using namespace cryomap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "cryomap_cli_io" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<unsigned char> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                      std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    REQUIRE(bool(out));
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
}

std::int32_t le_i32(const std::vector<unsigned char>& b, std::size_t off) {
    std::uint32_t u = std::uint32_t(b[off]) | (std::uint32_t(b[off + 1]) << 8) |
                      (std::uint32_t(b[off + 2]) << 16) |
                      (std::uint32_t(b[off + 3]) << 24);
    std::int32_t v;
    std::memcpy(&v, &u, 4);
    return v;
}

float le_f32(const std::vector<unsigned char>& b, std::size_t off) {
    std::uint32_t u = std::uint32_t(b[off]) | (std::uint32_t(b[off + 1]) << 8) |
                      (std::uint32_t(b[off + 2]) << 16) |
                      (std::uint32_t(b[off + 3]) << 24);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

// Fixed integer-derived patterns (no libm) so the payload bytes are exactly
// reproducible on any platform.
Volume3D make_golden_volume() {
    Volume3D v(6, 2.0);
    for (std::size_t i = 0; i < v.data.size(); ++i)
        v.data[i] = double((i * 2654435761ULL) % 1000003ULL) / 1000.0 - 500.0;
    return v;
}

ImageStack make_golden_stack() {
    ImageStack s;
    s.side_n = 4;
    s.voxel_size = 1.25;
    for (int k = 0; k < 3; ++k) {
        Image2D img(4, 1.25);
        for (std::size_t i = 0; i < img.data.size(); ++i)
            img.data[i] = double(((i + 16 * k) * 40503ULL) % 65537ULL) / 256.0 - 128.0;
        s.images.push_back(img);
    }
    return s;
}

int run_cli(const std::string& args, const fs::path& stdout_path = {}) {
    std::string cmd = std::string(CRYOMAP_CLI_PATH) + " " + args;
    if (stdout_path.empty())
        cmd += " > /dev/null 2>&1";
    else
        cmd += " > " + stdout_path.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t at = hay.find(needle); at != std::string::npos;
         at = hay.find(needle, at + needle.size()))
        ++n;
    return n;
}

FSCCurve make_curve(int side_n, double voxel, const std::vector<double>& vals) {
    FSCCurve c;
    c.side_n = side_n;
    c.voxel_size = voxel;
    c.value = vals;
    return c;
}

} // namespace

TEST_CASE("volume persistence: write/read round trip is bit-exact on disk") {
    const fs::path dir = scratch("roundtrip");
    Volume3D v(8, 1.7);
    Rng rng(401, 0xD15C);
    for (double& x : v.data) x = rng.gaussian(0.0, 3.0);

    const fs::path a = dir / "a.mrc";
    const fs::path b = dir / "b.mrc";
    write_mrc(a.string(), v);
    const Volume3D back = read_mrc_volume(a.string());
    write_mrc(b.string(), back);

    CHECK(read_bytes(a) == read_bytes(b));
    CHECK(back.side_n == 8);
    CHECK(back.voxel_size == doctest::Approx(1.7).epsilon(1e-6));
    for (std::size_t i = 0; i < v.data.size(); ++i)
        CHECK(back.data[i] == double(float(v.data[i]))); // float32 payload

    // Writing the same volume twice gives identical files.
    const fs::path c = dir / "c.mrc";
    write_mrc(c.string(), v);
    CHECK(read_bytes(a) == read_bytes(c));
}

TEST_CASE("stack persistence: image stacks round trip and keep their kind") {
    const fs::path dir = scratch("stack");
    ImageStack s;
    s.side_n = 6;
    s.voxel_size = 2.1;
    Rng rng(77, 0x57ACC);
    for (int k = 0; k < 5; ++k) {
        Image2D img(6, 2.1);
        for (double& x : img.data) x = rng.uniform(-4.0, 4.0);
        s.images.push_back(img);
    }
    const fs::path a = dir / "s.mrc";
    const fs::path b = dir / "s2.mrc";
    write_mrc(a.string(), s);
    const ImageStack back = read_mrc_stack(a.string());
    write_mrc(b.string(), back);

    CHECK(read_bytes(a) == read_bytes(b));
    CHECK(back.count() == 5);
    CHECK(back.side_n == 6);
    for (int k = 0; k < 5; ++k)
        for (std::size_t i = 0; i < back.images[k].data.size(); ++i)
            CHECK(back.images[k].data[i] == double(float(s.images[k].data[i])));

    // Kind mismatch through the convenience readers is rejected.
    CHECK_THROWS_AS((void)read_mrc_volume(a.string()), InvalidArgument);
    Volume3D v(4, 1.0);
    const fs::path vol = dir / "v.mrc";
    write_mrc(vol.string(), v);
    CHECK_THROWS_AS((void)read_mrc_stack(vol.string()), InvalidArgument);
}

TEST_CASE("golden files: byte layout is stable and parses with an independent reader") {
    const fs::path dir = scratch("golden");
    const fs::path golden_dir = fs::path(CRYOMAP_SOURCE_DIR) / "tests" / "golden";

    const fs::path vol_path = dir / "volume6.mrc";
    write_mrc(vol_path.string(), make_golden_volume());
    const std::vector<unsigned char> vol = read_bytes(vol_path);
    REQUIRE(fs::exists(golden_dir / "volume6.mrc"));
    CHECK(vol == read_bytes(golden_dir / "volume6.mrc"));

    // Independent header walk straight off the documented byte offsets.
    REQUIRE(vol.size() == 1024 + 6 * 6 * 6 * 4);
    CHECK(le_i32(vol, 0) == 6);   // nx
    CHECK(le_i32(vol, 4) == 6);   // ny
    CHECK(le_i32(vol, 8) == 6);   // nz
    CHECK(le_i32(vol, 12) == 2);  // mode = float32
    CHECK(le_i32(vol, 28) == 6);  // mx
    CHECK(le_i32(vol, 32) == 6);  // my
    CHECK(le_i32(vol, 36) == 6);  // mz
    CHECK(le_f32(vol, 40) == doctest::Approx(12.0f)); // cell x, Angstrom
    CHECK(le_f32(vol, 44) == doctest::Approx(12.0f));
    CHECK(le_f32(vol, 48) == doctest::Approx(12.0f));
    CHECK(le_f32(vol, 52) == doctest::Approx(90.0f)); // cell angles
    CHECK(le_f32(vol, 56) == doctest::Approx(90.0f));
    CHECK(le_f32(vol, 60) == doctest::Approx(90.0f));
    CHECK(le_i32(vol, 64) == 1); // mapc
    CHECK(le_i32(vol, 68) == 2); // mapr
    CHECK(le_i32(vol, 72) == 3); // maps
    CHECK(le_i32(vol, 88) == 1); // space group 1 = volume
    CHECK(le_i32(vol, 92) == 0); // no extended header
    CHECK(vol[208] == 'M');
    CHECK(vol[209] == 'A');
    CHECK(vol[210] == 'P');
    CHECK(vol[211] == ' ');
    CHECK(vol[212] == 0x44); // little-endian machine stamp
    CHECK(vol[213] == 0x44);
    CHECK(vol[214] == 0x00);
    CHECK(vol[215] == 0x00);
    const Volume3D truth_vol = make_golden_volume();
    float mn = 1e30f, mx = -1e30f;
    double sum = 0.0;
    for (std::size_t i = 0; i < truth_vol.data.size(); ++i) {
        const float f = float(truth_vol.data[i]);
        CHECK(le_f32(vol, 1024 + i * 4) == f);
        mn = std::min(mn, f);
        mx = std::max(mx, f);
        sum += f;
    }
    CHECK(le_f32(vol, 76) == mn);                                  // dmin
    CHECK(le_f32(vol, 80) == mx);                                  // dmax
    CHECK(le_f32(vol, 84) ==
          doctest::Approx(sum / double(truth_vol.data.size()))); // dmean

    const fs::path stk_path = dir / "stack3.mrc";
    write_mrc(stk_path.string(), make_golden_stack());
    const std::vector<unsigned char> stk = read_bytes(stk_path);
    REQUIRE(fs::exists(golden_dir / "stack3.mrc"));
    CHECK(stk == read_bytes(golden_dir / "stack3.mrc"));
    CHECK(le_i32(stk, 0) == 4);  // nx
    CHECK(le_i32(stk, 4) == 4);  // ny
    CHECK(le_i32(stk, 8) == 3);  // nz = image count
    CHECK(le_i32(stk, 12) == 2); // mode
    CHECK(le_i32(stk, 36) == 1); // mz = 1 for stacks
    CHECK(le_f32(stk, 40) == doctest::Approx(5.0f)); // 4 * 1.25
    CHECK(le_i32(stk, 88) == 0); // space group 0 = stack
    CHECK(stk[208] == 'M');
}

TEST_CASE("malformed MRC input: every corruption maps to its own error") {
    const fs::path dir = scratch("badmrc");
    const fs::path good = dir / "good.mrc";
    write_mrc(good.string(), make_golden_volume());
    const std::vector<unsigned char> base = read_bytes(good.string());

    auto patched = [&](std::size_t off, std::initializer_list<unsigned char> bytes) {
        std::vector<unsigned char> b = base;
        std::size_t at = off;
        for (unsigned char x : bytes) b[at++] = x;
        return b;
    };

    const fs::path bad = dir / "bad.mrc";

    write_bytes(bad, patched(12, {1, 0, 0, 0})); // mode 1 = int16
    CHECK_THROWS_AS((void)read_mrc(bad.string()), UnsupportedMode);

    write_bytes(bad, patched(208, {'X', 'A', 'P', ' '}));
    CHECK_THROWS_AS((void)read_mrc(bad.string()), BadMagic);

    std::vector<unsigned char> short_payload(base.begin(), base.end() - 8);
    write_bytes(bad, short_payload);
    CHECK_THROWS_AS((void)read_mrc(bad.string()), TruncatedFile);

    std::vector<unsigned char> short_header(base.begin(), base.begin() + 512);
    write_bytes(bad, short_header);
    CHECK_THROWS_AS((void)read_mrc(bad.string()), TruncatedFile);

    write_bytes(bad, patched(4, {7, 0, 0, 0})); // ny != nx
    CHECK_THROWS_AS((void)read_mrc(bad.string()), InvalidArgument);

    CHECK_THROWS_AS((void)read_mrc((dir / "missing.mrc").string()), IoError);

    // A trailing-garbage file is tolerated (payload length is authoritative).
    std::vector<unsigned char> longer = base;
    longer.push_back(0);
    write_bytes(bad, longer);
    CHECK_NOTHROW((void)read_mrc(bad.string()));
}

TEST_CASE("particle metadata: 100 random rows round trip to 9 significant digits") {
    const fs::path dir = scratch("meta");
    Rng rng(11, 0x3E7A);
    std::vector<ParticleMetaRow> rows;
    for (int i = 0; i < 100; ++i) {
        ParticleMetaRow r;
        r.id = i;
        r.rot = rng.uniform(0.0, 360.0);
        r.tilt = rng.uniform(0.0, 180.0);
        r.psi = rng.uniform(0.0, 360.0);
        r.shift_x = std::floor(rng.uniform(-2.0, 3.0));
        r.shift_y = std::floor(rng.uniform(-2.0, 3.0));
        r.defocus_A = rng.uniform(5000.0, 30000.0);
        r.voltage_kv = 300.0;
        r.cs_mm = rng.uniform(0.5, 3.0);
        r.amplitude_contrast = rng.uniform(0.0, 0.2);
        rows.push_back(r);
    }
    const fs::path p = dir / "meta.csv";
    write_particle_meta(p.string(), rows);
    const std::vector<ParticleMetaRow> back = read_particle_meta(p.string());
    REQUIRE(back.size() == rows.size());
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].id == rows[i].id);
        CHECK(close(back[i].rot, rows[i].rot));
        CHECK(close(back[i].tilt, rows[i].tilt));
        CHECK(close(back[i].psi, rows[i].psi));
        CHECK(close(back[i].shift_x, rows[i].shift_x));
        CHECK(close(back[i].shift_y, rows[i].shift_y));
        CHECK(close(back[i].defocus_A, rows[i].defocus_A));
        CHECK(close(back[i].voltage_kv, rows[i].voltage_kv));
        CHECK(close(back[i].cs_mm, rows[i].cs_mm));
        CHECK(close(back[i].amplitude_contrast, rows[i].amplitude_contrast));
    }
}

TEST_CASE("particle metadata: parse failures name the line; header-only is empty") {
    const fs::path dir = scratch("metabad");
    const std::string header =
        "id,rot,tilt,psi,shift_x,shift_y,defocus_A,voltage_kv,cs_mm,"
        "amplitude_contrast";

    const fs::path p = dir / "m.csv";
    {
        std::ofstream out(p);
        out << header << "\n";
    }
    CHECK(read_particle_meta(p.string()).empty());

    {
        std::ofstream out(p, std::ios::trunc);
        out << header << "\n"
            << "0,10,20,30,0,0,15000,300,2,0.07\n"
            << "1,10,oops,30,0,0,15000,300,2,0.07\n";
    }
    try {
        (void)read_particle_meta(p.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    {
        std::ofstream out(p, std::ios::trunc);
        out << "id,rot\n0,1\n";
    }
    CHECK_THROWS_AS((void)read_particle_meta(p.string()), ParseError);

    {
        std::ofstream out(p, std::ios::trunc);
        out << header << "\n0,10,20\n";
    }
    try {
        (void)read_particle_meta(p.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("curve emission: CSV column layout and constant-curve values") {
    const fs::path dir = scratch("curvecsv");
    const std::vector<double> flat(5, 0.25);
    std::vector<double> ramp(5);
    for (int r = 0; r < 5; ++r) ramp[r] = 1.0 - 0.2 * r;

    const std::vector<NamedCurve> curves = {{"steady", make_curve(8, 1.5, flat)},
                                            {"falling", make_curve(8, 1.5, ramp)}};
    const fs::path p = dir / "c.csv";
    emit_curve(p.string(), curves, CurveFormat::csv);

    std::ifstream in(p);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "shell_radius,freq_inv_A,steady,falling");
    CHECK(count_occurrences(line, ",") == 3); // 2 axis columns + one per curve
    int n_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CHECK(count_occurrences(line, ",") == 3);
        CHECK(line.substr(line.find(',', line.find(',') + 1) + 1, 4) == "0.25");
        ++n_rows;
    }
    CHECK(n_rows == 5);

    // Curves must share the shell axis.
    const std::vector<NamedCurve> mismatched = {
        {"a", make_curve(8, 1.5, flat)}, {"b", make_curve(10, 1.5, flat)}};
    CHECK_THROWS_AS(emit_curve((dir / "x.csv").string(), mismatched, CurveFormat::csv),
                    InvalidArgument);
    CHECK_THROWS_AS(emit_curve((dir / "x.csv").string(), {}, CurveFormat::csv),
                    InvalidArgument);
}

TEST_CASE("curve emission: SVG holds one polyline per curve plus the threshold") {
    const fs::path dir = scratch("curvesvg");
    std::vector<double> a(9), b(9);
    for (int r = 0; r < 9; ++r) {
        a[r] = 1.0 / (1.0 + 0.3 * r);
        b[r] = 1.0 / (1.0 + 0.6 * r);
    }
    const std::vector<NamedCurve> curves = {{"half_map", make_curve(16, 1.2, a)},
                                            {"model_map", make_curve(16, 1.2, b)}};
    const fs::path p = dir / "c.svg";
    emit_curve(p.string(), curves, CurveFormat::svg);
    const std::string svg = slurp(p);

    CHECK(count_occurrences(svg, "<polyline") == 2); // exactly one per curve
    CHECK(count_occurrences(svg, "class=\"threshold\"") == 1);
    CHECK(svg.find("0.143") != std::string::npos);
    CHECK(svg.find("half_map") != std::string::npos);
    CHECK(svg.find("model_map") != std::string::npos);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);

    // Deterministic bytes for identical inputs.
    const fs::path q = dir / "c2.svg";
    emit_curve(q.string(), curves, CurveFormat::svg);
    CHECK(slurp(q) == svg);
}

TEST_CASE("command line: exit codes separate validation from I/O failures") {
    const fs::path dir = scratch("cli_codes");
    const fs::path truth = dir / "truth.mrc";
    CHECK(run_cli("phantom --side 12 --voxel 1.5 --blobs 3 --seed 9 --out " +
                  truth.string()) == 0);
    REQUIRE(fs::exists(truth));

    // Self-FSC: curve identically 1, resolution at the sampling limit.
    const fs::path report = dir / "fsc_report.txt";
    const fs::path curve_csv = dir / "fsc.csv";
    CHECK(run_cli("fsc " + truth.string() + " " + truth.string() + " --out-csv " +
                      curve_csv.string(),
                  report) == 0);
    const std::string rep = slurp(report);
    CHECK(rep.find("limit_reached=1") != std::string::npos);
    {
        std::ifstream in(curve_csv);
        std::string line;
        REQUIRE(std::getline(in, line)); // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::size_t last = line.rfind(',');
            CHECK(std::stod(line.substr(last + 1)) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }

    CHECK(run_cli("fsc " + (dir / "missing.mrc").string() + " " + truth.string()) == 2);
    CHECK(run_cli("refine --stack only") == 1);
    CHECK(run_cli("nonsense") == 1);
    CHECK(run_cli("--help") == 0);

    // Validation failures must not leave partial outputs behind.
    const fs::path stack = dir / "stack.mrc";
    const fs::path meta = dir / "meta.csv";
    CHECK(run_cli("simulate --truth " + truth.string() + " --count 0 --out-stack " +
                  stack.string() + " --out-meta " + meta.string()) == 1);
    CHECK(!fs::exists(stack));
    CHECK(!fs::exists(meta));
}

TEST_CASE("command line: one-iteration refine writes every declared artifact") {
    const fs::path dir = scratch("cli_refine");
    const fs::path truth = dir / "truth.mrc";
    const fs::path stack = dir / "stack.mrc";
    const fs::path meta = dir / "meta.csv";
    REQUIRE(run_cli("phantom --side 12 --voxel 1.5 --blobs 3 --seed 9 --out " +
                    truth.string()) == 0);
    REQUIRE(run_cli("simulate --truth " + truth.string() +
                    " --count 8 --angular-step 90 --trans-radius 0 "
                    "--noise-sigma 0.3 --seed 4 --identity-ctf --out-stack " +
                    stack.string() + " --out-meta " + meta.string()) == 0);

    const fs::path out = dir / "refined";
    const fs::path report = dir / "report.txt";
    CHECK(run_cli("refine --stack " + stack.string() + " --meta " + meta.string() +
                      " --identity-ctf --mode naive --angular-step 90 "
                      "--trans-radius 0 --max-iters 1 --seed 5 --out-dir " +
                      out.string(),
                  report) == 0);
    for (const char* name :
         {"map.mrc", "half_a.mrc", "half_b.mrc", "fsc.csv", "fsc.svg"})
        CHECK(fs::exists(out / name));
    const std::string rep = slurp(report);
    CHECK(rep.find("iterations=1") != std::string::npos);
    CHECK(rep.find("crossing_shell=") != std::string::npos);

    // Config file drives the run; explicit flags win; unknown keys fail.
    const fs::path cfg = dir / "run.cfg";
    {
        std::ofstream c(cfg);
        c << "mode=naive\nmax_iters=1\nangular_step_deg=90\ntrans_radius=0\n"
             "kernel.bandwidth=2.0\nseed=5\n";
    }
    CHECK(run_cli("refine --stack " + stack.string() + " --meta " + meta.string() +
                  " --identity-ctf --config " + cfg.string() + " --out-dir " +
                  (dir / "refined_cfg").string()) == 0);
    {
        std::ofstream c(cfg, std::ios::app);
        c << "bogus=1\n";
    }
    CHECK(run_cli("refine --stack " + stack.string() + " --meta " + meta.string() +
                  " --identity-ctf --config " + cfg.string() + " --out-dir " +
                  (dir / "refined_bad").string()) == 1);
}

TEST_CASE("command line: identical arguments and seed give byte-identical outputs") {
    const fs::path dir = scratch("cli_determinism");
    const fs::path truth = dir / "truth.mrc";
    REQUIRE(run_cli("phantom --side 12 --voxel 1.5 --blobs 3 --seed 21 --out " +
                    truth.string()) == 0);

    const std::string sim_args =
        " --count 10 --angular-step 90 --trans-radius 1 --noise-sigma 0.2 "
        "--seed 13 --identity-ctf ";
    REQUIRE(run_cli("simulate --truth " + truth.string() + sim_args +
                    "--out-stack " + (dir / "s1.mrc").string() + " --out-meta " +
                    (dir / "m1.csv").string()) == 0);
    REQUIRE(run_cli("simulate --truth " + truth.string() + sim_args +
                    "--out-stack " + (dir / "s2.mrc").string() + " --out-meta " +
                    (dir / "m2.csv").string()) == 0);
    CHECK(read_bytes(dir / "s1.mrc") == read_bytes(dir / "s2.mrc"));
    CHECK(slurp(dir / "m1.csv") == slurp(dir / "m2.csv"));

    for (int pass = 1; pass <= 2; ++pass)
        REQUIRE(run_cli("reconstruct --stack " + (dir / "s1.mrc").string() +
                        " --meta " + (dir / "m1.csv").string() +
                        " --identity-ctf --out " +
                        (dir / ("r" + std::to_string(pass) + ".mrc")).string()) == 0);
    CHECK(read_bytes(dir / "r1.mrc") == read_bytes(dir / "r2.mrc"));
}
