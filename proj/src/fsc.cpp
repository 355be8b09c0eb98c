#include "cryomap/fsc.hpp"

#include <algorithm>
#include <cmath>

#include "cryomap/fourier.hpp"

namespace cryomap {

FSCCurve fsc(const FourierVolume& F, const FourierVolume& G) {
    if (F.side_n != G.side_n) throw GridMismatch("fsc: side_n differs");
    const int n = F.side_n;
    const int half = n / 2;
    std::vector<cdouble> num(half + 1, cdouble(0, 0));
    std::vector<double> pf(half + 1, 0.0), pg(half + 1, 0.0);
    for (int c = 0; c < n; ++c) {
        const int l = signed_freq(c, n);
        for (int b = 0; b < n; ++b) {
            const int k = signed_freq(b, n);
            for (int a = 0; a < n; ++a) {
                const int h = signed_freq(a, n);
                const int r = int(std::lround(
                    std::sqrt(double(h) * h + double(k) * k + double(l) * l)));
                if (r > half) continue;
                const cdouble x = F.at_storage(a, b, c);
                const cdouble y = G.at_storage(a, b, c);
                num[r] += x * std::conj(y);
                pf[r] += std::norm(x);
                pg[r] += std::norm(y);
            }
        }
    }
    FSCCurve curve;
    curve.side_n = n;
    curve.voxel_size = F.voxel_size;
    curve.value.resize(half + 1, 0.0);
    for (int r = 0; r <= half; ++r) {
        const double den = std::sqrt(pf[r] * pg[r]);
        curve.value[r] = den > 0.0 ? num[r].real() / den : 0.0;
    }
    return curve;
}

Resolution resolution_at_threshold(const FSCCurve& c, double threshold) {
    Resolution res;
    const int last = c.n_shells() - 1;
    for (int r = 1; r <= last; ++r) {
        if (c.value[r] < threshold && c.value[r - 1] >= threshold) {
            const double drop = c.value[r - 1] - c.value[r];
            const double frac = drop > 0.0 ? (c.value[r - 1] - threshold) / drop : 0.0;
            res.crossing_shell = double(r - 1) + frac;
            res.freq_inv_A = c.freq(res.crossing_shell);
            res.resolution_A = res.freq_inv_A > 0.0 ? 1.0 / res.freq_inv_A : 0.0;
            return res;
        }
    }
    res.crossing_shell = double(last);
    res.freq_inv_A = c.freq(res.crossing_shell);
    res.resolution_A = res.freq_inv_A > 0.0 ? 1.0 / res.freq_inv_A : 0.0;
    res.limit_reached = true;
    return res;
}

Volume3D apply_mask(const Volume3D& v, const Mask& m) {
    if (v.side_n != m.side_n) throw GridMismatch("apply_mask: side_n differs");
    Volume3D out = v;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= m.w[i];
    return out;
}

Mask make_mask(const Volume3D& reference, double level, double soft_edge_voxels) {
    if (!(level > 0.0)) throw InvalidArgument("mask level must be > 0");
    const int n = reference.side_n;
    std::vector<char> support(reference.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < reference.size(); ++i)
        if (std::abs(reference.data[i]) >= level) {
            support[i] = 1;
            any = true;
        }
    if (!any) throw EmptyMask("no voxel reaches the mask level");

    // dilate by one voxel (6-connected plus diagonals within the unit cube)
    std::vector<char> dilated = support;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (support[(std::size_t(k) * n + j) * n + i]) continue;
                bool near = false;
                for (int dk = -1; dk <= 1 && !near; ++dk)
                    for (int dj = -1; dj <= 1 && !near; ++dj)
                        for (int di = -1; di <= 1 && !near; ++di) {
                            int a = i + di, b = j + dj, c = k + dk;
                            if (a < 0 || a >= n || b < 0 || b >= n || c < 0 || c >= n)
                                continue;
                            if (support[(std::size_t(c) * n + b) * n + a]) near = true;
                        }
                if (near) dilated[(std::size_t(k) * n + j) * n + i] = 1;
            }

    Mask m;
    m.side_n = n;
    m.voxel_size = reference.voxel_size;
    m.w.assign(reference.size(), 0.0);
    const int reach = int(std::ceil(soft_edge_voxels)) + 1;
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const std::size_t idx = (std::size_t(k) * n + j) * n + i;
                if (dilated[idx]) {
                    m.w[idx] = 1.0;
                    continue;
                }
                if (soft_edge_voxels <= 0.0) continue;
                // distance to the dilated support within the taper reach
                double best_sq = 1e300;
                for (int dk = -reach; dk <= reach; ++dk)
                    for (int dj = -reach; dj <= reach; ++dj)
                        for (int di = -reach; di <= reach; ++di) {
                            int a = i + di, b = j + dj, c = k + dk;
                            if (a < 0 || a >= n || b < 0 || b >= n || c < 0 || c >= n)
                                continue;
                            if (!dilated[(std::size_t(c) * n + b) * n + a]) continue;
                            double d2 = double(di) * di + double(dj) * dj + double(dk) * dk;
                            best_sq = std::min(best_sq, d2);
                        }
                if (best_sq >= soft_edge_voxels * soft_edge_voxels) continue;
                double d = std::sqrt(best_sq);
                m.w[idx] = 0.5 * (1.0 + std::cos(pi * d / soft_edge_voxels));
            }
    return m;
}

FSCCurve model_map_fsc(const Volume3D& experimental, const Volume3D& reference,
                       const Mask* mask) {
    if (experimental.side_n != reference.side_n ||
        experimental.voxel_size != reference.voxel_size)
        throw GridMismatch("model_map_fsc: grids differ");
    if (mask) {
        return fsc(fft3_centered(apply_mask(experimental, *mask)),
                   fft3_centered(apply_mask(reference, *mask)));
    }
    return fsc(fft3_centered(experimental), fft3_centered(reference));
}

} // namespace cryomap
