#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace cryomap {

// One particle's pose and optics record as stored on disk. Angles are ZYZ
// Euler angles in degrees, shifts are in pixels.
struct ParticleMetaRow {
    std::int64_t id = 0;
    double rot = 0.0;
    double tilt = 0.0;
    double psi = 0.0;
    double shift_x = 0.0;
    double shift_y = 0.0;
    double defocus_A = 0.0;
    double voltage_kv = 300.0;
    double cs_mm = 0.0;
    double amplitude_contrast = 0.0;
};

// CSV with the fixed header
//   id,rot,tilt,psi,shift_x,shift_y,defocus_A,voltage_kv,cs_mm,amplitude_contrast
// and one row per particle; values carry 12 significant digits, so decimals
// entered with up to 9 digits round trip exactly and arbitrary doubles round
// trip to well under 1e-9 relative; a write → read → write cycle reproduces
// the same file. write throws IoError; read
// throws IoError (unreadable) or ParseError naming the offending line.
void write_particle_meta(const std::string& path,
                         const std::vector<ParticleMetaRow>& rows);
std::vector<ParticleMetaRow> read_particle_meta(const std::string& path);

} // namespace cryomap
