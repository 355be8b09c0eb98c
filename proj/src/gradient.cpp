#include "cryomap/gradient.hpp"

#include <cmath>

namespace cryomap {

GradientField discrete_gradient(const Volume3D& v, BoundaryMode mode) {
    const int n = v.side_n;
    GradientField g(n);
    const bool periodic = (mode == BoundaryMode::periodic);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double x = v.at(i, j, k);
                const std::size_t m = v.idx(i, j, k);
                g.d1[m] = i > 0 ? x - v.at(i - 1, j, k)
                                : (periodic ? x - v.at(n - 1, j, k) : 0.0);
                g.d2[m] = j > 0 ? x - v.at(i, j - 1, k)
                                : (periodic ? x - v.at(i, n - 1, k) : 0.0);
                g.d3[m] = k > 0 ? x - v.at(i, j, k - 1)
                                : (periodic ? x - v.at(i, j, n - 1) : 0.0);
            }
    return g;
}

// Per axis (replicate): (D*g)_i = g_i - g_{i+1} for 0 < i < n-1,
// (D*g)_0 = -g_1, (D*g)_{n-1} = g_{n-1}, since (Dx)_0 is identically 0.
// Periodic: (D*g)_i = g_i - g_{(i+1) mod n}.
Volume3D gradient_adjoint(const GradientField& g, BoundaryMode mode) {
    const int n = g.side_n;
    Volume3D out(n, 1.0);
    const bool periodic = (mode == BoundaryMode::periodic);
    auto flat = [n](int i, int j, int k) {
        return (std::size_t(k) * n + j) * n + i;
    };
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                // axis 1 (x)
                if (periodic) {
                    acc += g.d1[flat(i, j, k)] - g.d1[flat((i + 1) % n, j, k)];
                } else {
                    if (i > 0) acc += g.d1[flat(i, j, k)];
                    if (i < n - 1) acc -= g.d1[flat(i + 1, j, k)];
                }
                // axis 2 (y)
                if (periodic) {
                    acc += g.d2[flat(i, j, k)] - g.d2[flat(i, (j + 1) % n, k)];
                } else {
                    if (j > 0) acc += g.d2[flat(i, j, k)];
                    if (j < n - 1) acc -= g.d2[flat(i, j + 1, k)];
                }
                // axis 3 (z)
                if (periodic) {
                    acc += g.d3[flat(i, j, k)] - g.d3[flat(i, j, (k + 1) % n)];
                } else {
                    if (k > 0) acc += g.d3[flat(i, j, k)];
                    if (k < n - 1) acc -= g.d3[flat(i, j, k + 1)];
                }
                out.data[flat(i, j, k)] = acc;
            }
    return out;
}

double gradient_fourier_multiplier(int h, int k, int l, int side_n) {
    const double pi = 3.14159265358979323846;
    auto s2 = [&](int f) {
        double s = std::sin(pi * double(f) / double(side_n));
        return s * s;
    };
    return 4.0 * (s2(h) + s2(k) + s2(l));
}

} // namespace cryomap
