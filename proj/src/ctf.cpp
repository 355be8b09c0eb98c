#include "cryomap/ctf.hpp"

#include <cmath>
#include <string>

namespace cryomap {

namespace {
const double kPi = 3.14159265358979323846;
}

double electron_wavelength_A(double voltage_kv) {
    double v = voltage_kv * 1000.0;
    return 12.2639 / std::sqrt(v + 0.97845e-6 * v * v);
}

double ctf_value(const CTFParams& c, double s) {
    if (c.identity_flag) return 1.0;
    const double lambda = electron_wavelength_A(c.voltage_kv);
    const double cs_A = c.cs_mm * 1e7;
    const double s2 = s * s;
    const double chi = kPi * lambda * c.defocus_A * s2 -
                       (kPi / 2.0) * cs_A * lambda * lambda * lambda * s2 * s2;
    const double a = c.amplitude_contrast;
    return -(std::sqrt(1.0 - a * a) * std::sin(chi) + a * std::cos(chi));
}

void validate_ctf(const CTFParams& c) {
    if (!(c.voltage_kv > 0.0))
        throw InvalidArgument("voltage_kv must be positive");
    if (!(c.amplitude_contrast >= 0.0 && c.amplitude_contrast <= 1.0))
        throw InvalidArgument("amplitude_contrast must lie in [0,1], got " +
                              std::to_string(c.amplitude_contrast));
}

} // namespace cryomap
