#include "cryomap/orientation.hpp"

#include <cmath>

namespace cryomap {

OrientationGrid make_orientation_grid(int side_n, double angular_step_deg,
                                      int trans_radius) {
    if (!(angular_step_deg > 0.0))
        throw InvalidArgument("angular step must be positive");
    if (trans_radius < 0 || trans_radius > side_n / 8)
        throw InvalidArgument("translation radius must lie in [0, side_n/8]");

    OrientationGrid grid;
    grid.side_n = side_n;
    grid.angular_step_deg = angular_step_deg;
    grid.trans_radius = trans_radius;

    for (double tilt = 0.0; tilt <= 180.0 + 1e-9; tilt += angular_step_deg) {
        double t = std::min(tilt, 180.0);
        bool degenerate = (t == 0.0 || t == 180.0);
        for (double rot = 0.0; rot < 360.0 - 1e-9; rot += angular_step_deg) {
            if (degenerate && rot > 0.0) break; // rot folds into psi at the poles
            for (double psi = 0.0; psi < 360.0 - 1e-9; psi += angular_step_deg) {
                Pose p;
                p.rot = rot;
                p.tilt = t;
                p.psi = psi;
                grid.poses.push_back(p);
            }
        }
    }

    for (int dy = -trans_radius; dy <= trans_radius; ++dy)
        for (int dx = -trans_radius; dx <= trans_radius; ++dx)
            if (dx * dx + dy * dy <= trans_radius * trans_radius)
                grid.shifts.emplace_back(dx, dy);

    return grid;
}

} // namespace cryomap
