#include "cryomap/pose.hpp"

#include <cmath>
#include <string>

namespace cryomap {

namespace {
const double kDeg = 3.14159265358979323846 / 180.0;

Mat3 rot_z(double deg) {
    double c = std::cos(deg * kDeg), s = std::sin(deg * kDeg);
    Mat3 r;
    r.m[0][0] = c;  r.m[0][1] = -s; r.m[0][2] = 0.0;
    r.m[1][0] = s;  r.m[1][1] = c;  r.m[1][2] = 0.0;
    r.m[2][0] = 0.0; r.m[2][1] = 0.0; r.m[2][2] = 1.0;
    return r;
}

Mat3 rot_y(double deg) {
    double c = std::cos(deg * kDeg), s = std::sin(deg * kDeg);
    Mat3 r;
    r.m[0][0] = c;   r.m[0][1] = 0.0; r.m[0][2] = s;
    r.m[1][0] = 0.0; r.m[1][1] = 1.0; r.m[1][2] = 0.0;
    r.m[2][0] = -s;  r.m[2][1] = 0.0; r.m[2][2] = c;
    return r;
}
} // namespace

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}

Mat3 rotation_matrix(const Pose& p) {
    return mat_mul(rot_z(p.rot), mat_mul(rot_y(p.tilt), rot_z(p.psi)));
}

void validate_pose(const Pose& p, int side_n) {
    if (!(p.tilt >= 0.0 && p.tilt <= 180.0))
        throw InvalidArgument("pose tilt out of [0,180]: " + std::to_string(p.tilt));
    if (!(p.rot >= 0.0 && p.rot < 360.0))
        throw InvalidArgument("pose rot out of [0,360): " + std::to_string(p.rot));
    if (!(p.psi >= 0.0 && p.psi < 360.0))
        throw InvalidArgument("pose psi out of [0,360): " + std::to_string(p.psi));
    double lim = double(side_n) / 4.0;
    if (std::hypot(p.shift_x, p.shift_y) > lim)
        throw InvalidArgument("pose shift exceeds side_n/4");
}

} // namespace cryomap
