#pragma once
#include <array>

#include "cryomap/errors.hpp"

namespace cryomap {

// Rigid transform of a particle: ZYZ Euler angles in degrees plus an in-plane
// translation in pixels. Valid ranges: tilt in [0,180], rot/psi in [0,360).
struct Pose {
    double rot = 0.0;
    double tilt = 0.0;
    double psi = 0.0;
    double shift_x = 0.0;
    double shift_y = 0.0;
};

struct Mat3 {
    double m[3][3] = {{0}};

    std::array<double, 3> apply(double x, double y, double z) const {
        return {m[0][0] * x + m[0][1] * y + m[0][2] * z,
                m[1][0] * x + m[1][1] * y + m[1][2] * z,
                m[2][0] * x + m[2][1] * y + m[2][2] * z};
    }
};

Mat3 mat_mul(const Mat3& a, const Mat3& b);

// R = Rz(rot) * Ry(tilt) * Rz(psi); orthonormal with det +1.
Mat3 rotation_matrix(const Pose& p);

// Throws InvalidArgument when angle ranges or |shift| <= side_n/4 are violated.
void validate_pose(const Pose& p, int side_n);

} // namespace cryomap
