#pragma once
#include <cstdint>
#include <vector>

#include "cryomap/volume.hpp"

namespace cryomap {

// Synthetic ground-truth density: a sum of isotropic gaussian blobs.
struct PhantomSpec {
    struct Blob {
        double cx = 0.0, cy = 0.0, cz = 0.0; // voxel coordinates
        double amplitude = 1.0;              // density units, > 0
        double sigma = 2.0;                  // voxels
    };
    std::vector<Blob> blobs;
    std::uint64_t seed = 0;
};

// Renders the blob list. Each blob is truncated at 4 sigma so empty space is
// exactly zero. Throws BlobOutOfGrid when a center leaves the grid and
// InvalidArgument on non-positive amplitude/sigma.
Volume3D generate_phantom(const PhantomSpec& spec, int side_n, double voxel_size);

// Deterministic blob list clustered around the box center: centers inside a
// ball of radius 0.27*n, sigma in [1.6, 2.8] voxels, amplitude in [0.6, 1.4].
PhantomSpec random_phantom_spec(int n_blobs, int side_n, std::uint64_t seed);

// Fraction of voxels below `level_fraction` of the max (sparsity diagnostic).
double sparsity_fraction(const Volume3D& v, double level_fraction = 0.01);

} // namespace cryomap
