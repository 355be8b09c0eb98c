#include "cryomap/kernel.hpp"

#include <cmath>

namespace cryomap {

void validate_kernel(const KernelSpec& spec) {
    if (spec.kind == KernelKind::gaussian && !(spec.bandwidth > 0.0))
        throw InvalidArgument("gaussian kernel bandwidth must be positive");
}

double kernel_weight(const KernelSpec& spec, const int n[3], const double nj[3]) {
    if (spec.kind == KernelKind::gaussian) {
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) {
            int anchor = int(std::lround(nj[a]));
            if (std::abs(n[a] - anchor) > 1)
                throw OutsideWindow("grid point outside the 3x3x3 gaussian window");
            double d = nj[a] - n[a];
            d2 += d * d;
        }
        return std::exp(-d2 / spec.bandwidth);
    }
    double w = 1.0;
    for (int a = 0; a < 3; ++a) {
        double d = std::abs(nj[a] - n[a]);
        if (d >= 1.0 + 1e-12) {
            // more than one cell away: not a floor/ceil corner
            throw OutsideWindow("grid point outside the trilinear corner window");
        }
        w *= std::max(0.0, 1.0 - d);
    }
    return w;
}

int kernel_taps(const KernelSpec& spec, const double nj[3], KernelTap out[27]) {
    int count = 0;
    if (spec.kind == KernelKind::gaussian) {
        int anchor[3];
        for (int a = 0; a < 3; ++a) anchor[a] = int(std::lround(nj[a]));
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    KernelTap& t = out[count++];
                    t.p[0] = anchor[0] + dx;
                    t.p[1] = anchor[1] + dy;
                    t.p[2] = anchor[2] + dz;
                    double d2 = 0.0;
                    for (int a = 0; a < 3; ++a) {
                        double d = nj[a] - t.p[a];
                        d2 += d * d;
                    }
                    t.w = std::exp(-d2 / spec.bandwidth);
                }
        return count;
    }
    int lo[3];
    double frac[3];
    bool collapse[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = int(std::floor(nj[a]));
        frac[a] = nj[a] - lo[a];
        collapse[a] = (frac[a] == 0.0); // integer landing: floor == point
    }
    for (int cz = 0; cz <= (collapse[2] ? 0 : 1); ++cz)
        for (int cy = 0; cy <= (collapse[1] ? 0 : 1); ++cy)
            for (int cx = 0; cx <= (collapse[0] ? 0 : 1); ++cx) {
                KernelTap& t = out[count++];
                t.p[0] = lo[0] + cx;
                t.p[1] = lo[1] + cy;
                t.p[2] = lo[2] + cz;
                double wx = cx ? frac[0] : 1.0 - frac[0];
                double wy = cy ? frac[1] : 1.0 - frac[1];
                double wz = cz ? frac[2] : 1.0 - frac[2];
                t.w = wx * wy * wz;
            }
    return count;
}

} // namespace cryomap
