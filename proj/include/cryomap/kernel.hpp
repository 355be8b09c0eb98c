#pragma once
#include "cryomap/errors.hpp"

namespace cryomap {

enum class KernelKind { gaussian, trilinear };

// Interpolation/spreading kernel shared by slice extraction and
// backprojection. Gaussian: w = exp(-||n_j - n||^2 / bandwidth) over the
// 3x3x3 window centered on the rounded index. Trilinear: per-axis linear
// weights over the 8 floor/ceil corners.
struct KernelSpec {
    KernelKind kind = KernelKind::gaussian;
    double bandwidth = 2.0; // gaussian only
};

// Weight of grid point n for a continuous point nj. Throws OutsideWindow when
// n is not inside the kernel's window around nj's anchor.
double kernel_weight(const KernelSpec& spec, const int n[3], const double nj[3]);

struct KernelTap {
    int p[3];
    double w;
};

// Enumerates the window's (grid point, weight) pairs for nj. Returns the
// number of taps written (27 for gaussian; up to 8 for trilinear, with
// integer-landing axes collapsing duplicate corners). Order is deterministic.
int kernel_taps(const KernelSpec& spec, const double nj[3], KernelTap out[27]);

void validate_kernel(const KernelSpec& spec);

} // namespace cryomap
