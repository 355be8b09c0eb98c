#pragma once
#include <cstddef>
#include <utility>
#include <vector>

#include "cryomap/pose.hpp"

namespace cryomap {

// Uniform Euler-angle grid crossed with integer in-plane shifts inside a
// radius. Candidates are indexed pose-major: idx = pose_idx * n_shifts + s.
struct OrientationGrid {
    int side_n = 0;
    double angular_step_deg = 15.0;
    int trans_radius = 0;
    std::vector<Pose> poses;                 // shift fields zero
    std::vector<std::pair<int, int>> shifts; // (dx, dy), dx^2+dy^2 <= r^2

    std::size_t n_poses() const { return poses.size(); }
    std::size_t n_shifts() const { return shifts.size(); }
    std::size_t n_candidates() const { return poses.size() * shifts.size(); }

    std::size_t pose_of(std::size_t candidate) const { return candidate / shifts.size(); }
    std::size_t shift_of(std::size_t candidate) const { return candidate % shifts.size(); }

    Pose candidate(std::size_t index) const {
        Pose p = poses[pose_of(index)];
        const std::pair<int, int>& s = shifts[shift_of(index)];
        p.shift_x = s.first;
        p.shift_y = s.second;
        return p;
    }
};

// Builds the grid. Euler angles: rot/psi step through [0,360), tilt through
// [0,180]; at tilt 0 and 180 the rot axis is degenerate with psi, so only
// rot = 0 is kept (no duplicate poses). Throws InvalidArgument when
// trans_radius > side_n/8 or the step is not positive.
OrientationGrid make_orientation_grid(int side_n, double angular_step_deg,
                                      int trans_radius);

} // namespace cryomap
