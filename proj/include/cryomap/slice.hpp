#pragma once
#include <vector>

#include "cryomap/kernel.hpp"
#include "cryomap/pose.hpp"
#include "cryomap/volume.hpp"

namespace cryomap {

// A signed 2D frequency (k, l) of a particle image.
struct FreqComp {
    int k = 0;
    int l = 0;
};

// All components with round(|(k,l)|) <= radius_cutoff, in storage-scan order.
// A negative cutoff means the full plane.
std::vector<FreqComp> frequency_components(int side_n, double radius_cutoff);

// Samples V at R*(k,l,0)^T for each listed component by kernel-weighted
// normalized interpolation; components whose window leaves the grid become 0.
// No translation phase is applied.
void sample_slice(const FourierVolume& V, const Mat3& R, const KernelSpec& kernel,
                  const std::vector<FreqComp>& comps, cdouble* out);

// Translation phase exp(-2*pi*i (k dx + l dy) / n).
cdouble shift_phase(int side_n, int k, int l, double dx, double dy);

// Full-plane slice through the volume at the pose's orientation, including
// the pose's translation phase. Output is laid out like ParticleImage::f.
std::vector<cdouble> extract_slice(const FourierVolume& V, const Pose& pose,
                                   const KernelSpec& kernel);

} // namespace cryomap
