#pragma once
#include <vector>

#include "cryomap/volume.hpp"

namespace cryomap {

// Per-shell correlation curve over shells r = 0 .. side_n/2 (binning by
// round(|k|)); freq(r) converts shell radius to 1/Angstrom.
struct FSCCurve {
    int side_n = 0;
    double voxel_size = 1.0;
    std::vector<double> value; // size side_n/2 + 1

    int n_shells() const { return int(value.size()); }
    double freq(double r) const { return r / (double(side_n) * voxel_size); }
};

// Normalized per-shell correlation Re(sum F conj(G)) / sqrt(sum|F|^2 sum|G|^2);
// shells where either volume is identically zero get value 0.
FSCCurve fsc(const FourierVolume& F, const FourierVolume& G);

struct Resolution {
    double crossing_shell = 0.0; // fractional shell radius of the crossing
    double freq_inv_A = 0.0;
    double resolution_A = 0.0;
    bool limit_reached = false; // curve never dropped below the threshold
};

// First downward crossing scanning shells outward (DC excluded), linear
// interpolation between the bracketing shells. A curve that never drops
// below the threshold reports the Nyquist shell with limit_reached set.
Resolution resolution_at_threshold(const FSCCurve& c, double threshold);

struct Mask {
    int side_n = 0;
    double voxel_size = 1.0;
    std::vector<double> w; // values in [0,1]
};

Volume3D apply_mask(const Volume3D& v, const Mask& m);

// Binary support at |density| >= level, dilated by 1 voxel, cosine-tapered
// over soft_edge_voxels. Throws EmptyMask when nothing clears the level.
Mask make_mask(const Volume3D& reference, double level, double soft_edge_voxels);

// FSC between an experimental map and a reference map on the same grid,
// optionally masking both. Note: masked curves are reported raw (no
// phase-randomization correction), so treat masked values as optimistic.
FSCCurve model_map_fsc(const Volume3D& experimental, const Volume3D& reference,
                       const Mask* mask = nullptr);

} // namespace cryomap
