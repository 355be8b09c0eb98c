#include "cryomap/mrc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "cryomap/errors.hpp"

namespace cryomap {

namespace {

constexpr std::size_t kHeaderBytes = 1024;

void put_i32(std::vector<unsigned char>& buf, std::size_t off, std::int32_t v) {
    // Little-endian regardless of host byte order.
    buf[off + 0] = (unsigned char)(std::uint32_t(v) & 0xFF);
    buf[off + 1] = (unsigned char)((std::uint32_t(v) >> 8) & 0xFF);
    buf[off + 2] = (unsigned char)((std::uint32_t(v) >> 16) & 0xFF);
    buf[off + 3] = (unsigned char)((std::uint32_t(v) >> 24) & 0xFF);
}

void put_f32(std::vector<unsigned char>& buf, std::size_t off, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    buf[off + 0] = (unsigned char)(bits & 0xFF);
    buf[off + 1] = (unsigned char)((bits >> 8) & 0xFF);
    buf[off + 2] = (unsigned char)((bits >> 16) & 0xFF);
    buf[off + 3] = (unsigned char)((bits >> 24) & 0xFF);
}

std::int32_t get_i32(const std::vector<unsigned char>& buf, std::size_t off) {
    std::uint32_t bits = std::uint32_t(buf[off]) | (std::uint32_t(buf[off + 1]) << 8) |
                         (std::uint32_t(buf[off + 2]) << 16) |
                         (std::uint32_t(buf[off + 3]) << 24);
    return std::int32_t(bits);
}

float get_f32(const std::vector<unsigned char>& buf, std::size_t off) {
    std::uint32_t bits = std::uint32_t(buf[off]) | (std::uint32_t(buf[off + 1]) << 8) |
                         (std::uint32_t(buf[off + 2]) << 16) |
                         (std::uint32_t(buf[off + 3]) << 24);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

struct Stats {
    float dmin = 0.0f, dmax = 0.0f, dmean = 0.0f, rms = 0.0f;
};

Stats payload_stats(const std::vector<float>& payload) {
    Stats s;
    if (payload.empty()) return s;
    double mn = payload[0], mx = payload[0], sum = 0.0, sum2 = 0.0;
    for (float v : payload) {
        mn = std::min(mn, double(v));
        mx = std::max(mx, double(v));
        sum += v;
        sum2 += double(v) * v;
    }
    const double mean = sum / double(payload.size());
    const double var = std::max(0.0, sum2 / double(payload.size()) - mean * mean);
    s.dmin = float(mn);
    s.dmax = float(mx);
    s.dmean = float(mean);
    s.rms = float(std::sqrt(var));
    return s;
}

void write_file(const std::string& path, int nx, int ny, int nz, bool is_volume,
                double voxel_size, const std::vector<float>& payload) {
    std::vector<unsigned char> header(kHeaderBytes, 0);
    put_i32(header, 0, nx);
    put_i32(header, 4, ny);
    put_i32(header, 8, nz);
    put_i32(header, 12, 2); // mode 2 = float32
    // nxstart/nystart/nzstart stay 0.
    const int mz = is_volume ? nz : 1;
    put_i32(header, 28, nx);
    put_i32(header, 32, ny);
    put_i32(header, 36, mz);
    // Derive every cell length from the quantized cell_x so that the voxel
    // size a reader recovers (cell_x / nx) writes back to identical bytes.
    const float cx = float(nx * voxel_size);
    const double unit = double(cx) / nx;
    put_f32(header, 40, cx);
    put_f32(header, 44, float(ny * unit));
    put_f32(header, 48, float(mz * unit));
    put_f32(header, 52, 90.0f);
    put_f32(header, 56, 90.0f);
    put_f32(header, 60, 90.0f);
    put_i32(header, 64, 1);
    put_i32(header, 68, 2);
    put_i32(header, 72, 3);
    const Stats st = payload_stats(payload);
    put_f32(header, 76, st.dmin);
    put_f32(header, 80, st.dmax);
    put_f32(header, 84, st.dmean);
    put_i32(header, 88, is_volume ? 1 : 0); // space group: 1 volume, 0 stack
    put_i32(header, 92, 0);                 // no extended header
    header[208] = 'M';
    header[209] = 'A';
    header[210] = 'P';
    header[211] = ' ';
    header[212] = 0x44; // little-endian machine stamp
    header[213] = 0x44;
    header[214] = 0x00;
    header[215] = 0x00;
    put_f32(header, 216, st.rms);
    // nlabl at 220 stays 0; label area stays zeroed (no timestamps).

    std::vector<unsigned char> body(payload.size() * 4);
    for (std::size_t i = 0; i < payload.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &payload[i], 4);
        body[i * 4 + 0] = (unsigned char)(bits & 0xFF);
        body[i * 4 + 1] = (unsigned char)((bits >> 8) & 0xFF);
        body[i * 4 + 2] = (unsigned char)((bits >> 16) & 0xFF);
        body[i * 4 + 3] = (unsigned char)((bits >> 24) & 0xFF);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("write_mrc: cannot open " + path);
    out.write(reinterpret_cast<const char*>(header.data()),
              std::streamsize(header.size()));
    out.write(reinterpret_cast<const char*>(body.data()), std::streamsize(body.size()));
    if (!out) throw IoError("write_mrc: short write to " + path);
}

} // namespace

void write_mrc(const std::string& path, const Volume3D& v) {
    if (v.side_n <= 0 || v.data.size() != std::size_t(v.side_n) * v.side_n * v.side_n)
        throw InvalidArgument("write_mrc: malformed volume");
    std::vector<float> payload(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) payload[i] = float(v.data[i]);
    write_file(path, v.side_n, v.side_n, v.side_n, true, v.voxel_size, payload);
}

void write_mrc(const std::string& path, const ImageStack& s) {
    if (s.side_n <= 0 || s.images.empty())
        throw InvalidArgument("write_mrc: empty image stack");
    const std::size_t plane = std::size_t(s.side_n) * s.side_n;
    std::vector<float> payload;
    payload.reserve(plane * s.images.size());
    for (const Image2D& img : s.images) {
        if (img.side_n != s.side_n || img.data.size() != plane)
            throw InvalidArgument("write_mrc: stack image grid mismatch");
        for (double v : img.data) payload.push_back(float(v));
    }
    write_file(path, s.side_n, s.side_n, int(s.images.size()), false, s.voxel_size,
               payload);
}

MrcData read_mrc(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_mrc: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read_mrc: read failure on " + path);
    if (bytes.size() < kHeaderBytes)
        throw TruncatedFile("read_mrc: file shorter than the 1024-byte header");
    if (!(bytes[208] == 'M' && bytes[209] == 'A' && bytes[210] == 'P' &&
          bytes[211] == ' '))
        throw BadMagic("read_mrc: missing \"MAP \" identifier at offset 208");
    const std::int32_t mode = get_i32(bytes, 12);
    if (mode != 2)
        throw UnsupportedMode("read_mrc: mode " + std::to_string(mode) +
                              " (only mode 2 float32 is supported)");
    const std::int64_t nx = get_i32(bytes, 0);
    const std::int64_t ny = get_i32(bytes, 4);
    const std::int64_t nz = get_i32(bytes, 8);
    if (nx <= 0 || ny <= 0 || nz <= 0 || nx != ny)
        throw InvalidArgument("read_mrc: invalid dimensions");
    const std::int64_t nsymbt = get_i32(bytes, 92);
    if (nsymbt < 0) throw InvalidArgument("read_mrc: negative extended header size");
    const std::int64_t n_values = nx * ny * nz;
    if (n_values > std::int64_t(std::numeric_limits<std::int32_t>::max()))
        throw InvalidArgument("read_mrc: payload too large");
    const std::int64_t need = std::int64_t(kHeaderBytes) + nsymbt + n_values * 4;
    if (std::int64_t(bytes.size()) < need)
        throw TruncatedFile("read_mrc: file shorter than header + payload (" +
                            std::to_string(bytes.size()) + " < " +
                            std::to_string(need) + " bytes)");

    const std::size_t data_off = kHeaderBytes + std::size_t(nsymbt);
    std::vector<float> payload(static_cast<std::size_t>(n_values));
    for (std::size_t i = 0; i < payload.size(); ++i)
        payload[i] = get_f32(bytes, data_off + i * 4);

    const std::int32_t ispg = get_i32(bytes, 88);
    const float cell_x = get_f32(bytes, 40);
    const double voxel = nx > 0 && cell_x > 0.0f ? double(cell_x) / double(nx) : 1.0;

    MrcData out;
    out.is_volume = ispg == 1 && nz > 1;
    if (out.is_volume) {
        if (nz != nx)
            throw InvalidArgument("read_mrc: volume flag set but nz != nx");
        out.volume = Volume3D(int(nx), voxel);
        for (std::size_t i = 0; i < payload.size(); ++i)
            out.volume.data[i] = double(payload[i]);
    } else {
        out.stack.side_n = int(nx);
        out.stack.voxel_size = voxel;
        const std::size_t plane = std::size_t(nx) * std::size_t(ny);
        out.stack.images.assign(std::size_t(nz), Image2D(int(nx), voxel));
        for (std::size_t s = 0; s < std::size_t(nz); ++s)
            for (std::size_t i = 0; i < plane; ++i)
                out.stack.images[s].data[i] = double(payload[s * plane + i]);
    }
    return out;
}

Volume3D read_mrc_volume(const std::string& path) {
    MrcData d = read_mrc(path);
    if (!d.is_volume)
        throw InvalidArgument("read_mrc_volume: " + path + " holds an image stack");
    return std::move(d.volume);
}

ImageStack read_mrc_stack(const std::string& path) {
    MrcData d = read_mrc(path);
    if (d.is_volume)
        throw InvalidArgument("read_mrc_stack: " + path + " holds a volume");
    return std::move(d.stack);
}

} // namespace cryomap
