#include "cryomap/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cryomap/rng.hpp"

namespace cryomap {

Volume3D generate_phantom(const PhantomSpec& spec, int side_n, double voxel_size) {
    require_even_side(side_n);
    Volume3D v(side_n, voxel_size);
    for (const PhantomSpec::Blob& b : spec.blobs) {
        if (!(b.amplitude > 0.0)) throw InvalidArgument("blob amplitude must be > 0");
        if (!(b.sigma > 0.0)) throw InvalidArgument("blob sigma must be > 0");
        if (b.cx < 0.0 || b.cx > side_n - 1 || b.cy < 0.0 || b.cy > side_n - 1 ||
            b.cz < 0.0 || b.cz > side_n - 1)
            throw BlobOutOfGrid("blob center outside the grid");
        const double cut = 4.0 * b.sigma;
        const int ilo = std::max(0, int(std::ceil(b.cx - cut)));
        const int ihi = std::min(side_n - 1, int(std::floor(b.cx + cut)));
        const int jlo = std::max(0, int(std::ceil(b.cy - cut)));
        const int jhi = std::min(side_n - 1, int(std::floor(b.cy + cut)));
        const int klo = std::max(0, int(std::ceil(b.cz - cut)));
        const int khi = std::min(side_n - 1, int(std::floor(b.cz + cut)));
        const double inv2s2 = 1.0 / (2.0 * b.sigma * b.sigma);
        for (int k = klo; k <= khi; ++k)
            for (int j = jlo; j <= jhi; ++j)
                for (int i = ilo; i <= ihi; ++i) {
                    double dx = i - b.cx, dy = j - b.cy, dz = k - b.cz;
                    double d2 = dx * dx + dy * dy + dz * dz;
                    if (d2 > cut * cut) continue;
                    v.at(i, j, k) += b.amplitude * std::exp(-d2 * inv2s2);
                }
    }
    return v;
}

PhantomSpec random_phantom_spec(int n_blobs, int side_n, std::uint64_t seed) {
    PhantomSpec spec;
    spec.seed = seed;
    Rng rng(seed, 0xb10b);
    const double c = (side_n - 1) / 2.0;
    const double radius = 0.27 * side_n;
    for (int b = 0; b < n_blobs; ++b) {
        PhantomSpec::Blob blob;
        // rejection-sample a point in the ball
        double x, y, z;
        do {
            x = rng.uniform(-1.0, 1.0);
            y = rng.uniform(-1.0, 1.0);
            z = rng.uniform(-1.0, 1.0);
        } while (x * x + y * y + z * z > 1.0);
        blob.cx = c + radius * x;
        blob.cy = c + radius * y;
        blob.cz = c + radius * z;
        blob.sigma = rng.uniform(1.6, 2.8);
        blob.amplitude = rng.uniform(0.6, 1.4);
        spec.blobs.push_back(blob);
    }
    return spec;
}

double sparsity_fraction(const Volume3D& v, double level_fraction) {
    double max_abs = 0.0;
    for (double x : v.data) max_abs = std::max(max_abs, std::abs(x));
    if (max_abs == 0.0) return 1.0;
    const double level = level_fraction * max_abs;
    std::size_t below = 0;
    for (double x : v.data)
        if (std::abs(x) < level) ++below;
    return double(below) / double(v.size());
}

} // namespace cryomap
