#pragma once
#include <string>
#include <vector>

#include "cryomap/fsc.hpp"

namespace cryomap {

enum class CurveFormat { csv, svg };

struct NamedCurve {
    std::string name;
    FSCCurve curve;
};

// Writes shell-correlation curves that share one shell axis.
//   csv: columns shell_radius, freq_inv_A, then one column per curve.
//   svg: self-contained line plot — one polyline per curve, a horizontal
//        reference line at 0.143, axis labels, and a legend.
// Throws InvalidArgument when the list is empty or the shell axes disagree,
// IoError when the path cannot be written. Output is deterministic.
void emit_curve(const std::string& path, const std::vector<NamedCurve>& curves,
                CurveFormat format);

} // namespace cryomap
