#pragma once
#include <string>
#include <vector>

#include "cryomap/volume.hpp"

namespace cryomap {

// Stack of square real-space images on a shared grid (e.g. a particle stack).
struct ImageStack {
    int side_n = 0;
    double voxel_size = 1.0;
    std::vector<Image2D> images;

    std::size_t count() const { return images.size(); }
};

// Decoded contents of an MRC file: a 3D volume when the file's space-group
// word marks it as one (and nz > 1), otherwise a stack of nz images.
struct MrcData {
    bool is_volume = false;
    Volume3D volume;  // set when is_volume
    ImageStack stack; // set otherwise
};

// Writes a mode-2 (little-endian float32) MRC2014 file: dimensions at byte
// offsets 0/4/8, mode at 12, cell dimensions in Angstrom at 40, "MAP " at
// 208, machine stamp 0x44 0x44 0x00 0x00 at 212, min/max/mean statistics
// filled in. Output bytes are deterministic for identical inputs (no
// timestamps or labels). Throws IoError when the path cannot be written.
void write_mrc(const std::string& path, const Volume3D& v);
void write_mrc(const std::string& path, const ImageStack& s);

// Reads a file produced by write_mrc (or any conforming subset file):
// float32 payload after the 1024-byte header plus the extended header whose
// byte length sits in the 32-bit word at offset 92. Round-trips bit-exactly
// with write_mrc. Throws IoError (unreadable), TruncatedFile (shorter than
// header + payload), BadMagic (no "MAP " at 208), UnsupportedMode (mode != 2).
MrcData read_mrc(const std::string& path);

// Convenience wrappers that throw InvalidArgument when the file holds the
// other kind of contents.
Volume3D read_mrc_volume(const std::string& path);
ImageStack read_mrc_stack(const std::string& path);

} // namespace cryomap
