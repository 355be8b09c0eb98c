#include "cryomap/slice.hpp"

#include <cmath>

namespace cryomap {

std::vector<FreqComp> frequency_components(int side_n, double radius_cutoff) {
    std::vector<FreqComp> comps;
    comps.reserve(std::size_t(side_n) * side_n);
    for (int b = 0; b < side_n; ++b)
        for (int a = 0; a < side_n; ++a) {
            FreqComp c;
            c.k = signed_freq(a, side_n);
            c.l = signed_freq(b, side_n);
            if (radius_cutoff >= 0.0) {
                double r = std::hypot(double(c.k), double(c.l));
                if (std::lround(r) > std::lround(radius_cutoff)) continue;
            }
            comps.push_back(c);
        }
    return comps;
}

void sample_slice(const FourierVolume& V, const Mat3& R, const KernelSpec& kernel,
                  const std::vector<FreqComp>& comps, cdouble* out) {
    const int n = V.side_n;
    const int lo = -n / 2, hi = n / 2 - 1;
    KernelTap taps[27];
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        const auto nj = R.apply(double(comps[ci].k), double(comps[ci].l), 0.0);
        const double njv[3] = {nj[0], nj[1], nj[2]};
        const int count = kernel_taps(kernel, njv, taps);
        cdouble acc(0.0, 0.0);
        double wsum = 0.0;
        for (int t = 0; t < count; ++t) {
            const KernelTap& tap = taps[t];
            if (tap.p[0] < lo || tap.p[0] > hi || tap.p[1] < lo || tap.p[1] > hi ||
                tap.p[2] < lo || tap.p[2] > hi)
                continue;
            acc += tap.w * V.at_signed(tap.p[0], tap.p[1], tap.p[2]);
            wsum += tap.w;
        }
        out[ci] = wsum > 0.0 ? acc / wsum : cdouble(0.0, 0.0);
    }
}

cdouble shift_phase(int side_n, int k, int l, double dx, double dy) {
    const double ph = -2.0 * 3.14159265358979323846 * (k * dx + l * dy) / double(side_n);
    return cdouble(std::cos(ph), std::sin(ph));
}

std::vector<cdouble> extract_slice(const FourierVolume& V, const Pose& pose,
                                   const KernelSpec& kernel) {
    const int n = V.side_n;
    std::vector<FreqComp> comps = frequency_components(n, -1.0);
    std::vector<cdouble> out(comps.size());
    sample_slice(V, rotation_matrix(pose), kernel, comps, out.data());
    if (pose.shift_x != 0.0 || pose.shift_y != 0.0) {
        for (std::size_t ci = 0; ci < comps.size(); ++ci)
            out[ci] *= shift_phase(n, comps[ci].k, comps[ci].l, pose.shift_x, pose.shift_y);
    }
    return out;
}

} // namespace cryomap
