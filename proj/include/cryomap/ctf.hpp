#pragma once
#include "cryomap/errors.hpp"

namespace cryomap {

struct CTFParams {
    double voltage_kv = 300.0;
    double defocus_A = 15000.0; // positive = underfocus
    double cs_mm = 2.0;
    double amplitude_contrast = 0.07; // fraction in [0,1]
    bool identity_flag = false;       // forces CTF == 1 everywhere
};

// Relativistic electron wavelength in Angstrom for an accelerating voltage in
// volts: 12.2639 / sqrt(V + 0.97845e-6 V^2).
double electron_wavelength_A(double voltage_kv);

// CTF(s) = -(sqrt(1-A^2) sin(chi) + A cos(chi)) with
// chi(s) = pi*lambda*defocus*s^2 - (pi/2)*Cs*lambda^3*s^4, s in 1/Angstrom.
double ctf_value(const CTFParams& c, double s);

void validate_ctf(const CTFParams& c);

} // namespace cryomap
