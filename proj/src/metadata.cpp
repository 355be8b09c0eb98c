#include "cryomap/metadata.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cryomap/errors.hpp"

namespace cryomap {

namespace {

const char* kHeader =
    "id,rot,tilt,psi,shift_x,shift_y,defocus_A,voltage_kv,cs_mm,amplitude_contrast";
constexpr int kColumns = 10;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& cell, std::size_t line_no,
                    const char* column) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError("particle metadata line " + std::to_string(line_no) +
                         ": cannot parse " + column + " value '" + cell + "'");
    return v;
}

std::int64_t parse_id(const std::string& cell, std::size_t line_no) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(cell.c_str(), &end, 10);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError("particle metadata line " + std::to_string(line_no) +
                         ": cannot parse id value '" + cell + "'");
    return v;
}

} // namespace

void write_particle_meta(const std::string& path,
                         const std::vector<ParticleMetaRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("write_particle_meta: cannot open " + path);
    out << kHeader << '\n';
    for (const ParticleMetaRow& r : rows) {
        out << r.id << ',' << format_double(r.rot) << ',' << format_double(r.tilt)
            << ',' << format_double(r.psi) << ',' << format_double(r.shift_x) << ','
            << format_double(r.shift_y) << ',' << format_double(r.defocus_A) << ','
            << format_double(r.voltage_kv) << ',' << format_double(r.cs_mm) << ','
            << format_double(r.amplitude_contrast) << '\n';
    }
    if (!out) throw IoError("write_particle_meta: short write to " + path);
}

std::vector<ParticleMetaRow> read_particle_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_particle_meta: cannot open " + path);

    std::vector<ParticleMetaRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!saw_header) {
            if (line != kHeader)
                throw ParseError("particle metadata line 1: expected header '" +
                                 std::string(kHeader) + "'");
            saw_header = true;
            continue;
        }
        if (line.empty()) continue; // tolerate a trailing blank line
        const std::vector<std::string> cells = split_csv(line);
        if (int(cells.size()) != kColumns)
            throw ParseError("particle metadata line " + std::to_string(line_no) +
                             ": expected " + std::to_string(kColumns) +
                             " columns, found " + std::to_string(cells.size()));
        ParticleMetaRow r;
        r.id = parse_id(cells[0], line_no);
        r.rot = parse_double(cells[1], line_no, "rot");
        r.tilt = parse_double(cells[2], line_no, "tilt");
        r.psi = parse_double(cells[3], line_no, "psi");
        r.shift_x = parse_double(cells[4], line_no, "shift_x");
        r.shift_y = parse_double(cells[5], line_no, "shift_y");
        r.defocus_A = parse_double(cells[6], line_no, "defocus_A");
        r.voltage_kv = parse_double(cells[7], line_no, "voltage_kv");
        r.cs_mm = parse_double(cells[8], line_no, "cs_mm");
        r.amplitude_contrast = parse_double(cells[9], line_no, "amplitude_contrast");
        rows.push_back(r);
    }
    if (!saw_header)
        throw ParseError("particle metadata line 1: empty file (missing header)");
    return rows;
}

} // namespace cryomap
