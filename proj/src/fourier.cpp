#include "cryomap/fourier.hpp"

#include <fftw3.h>

#include <mutex>

namespace cryomap {

namespace {

// The FFTW planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// FFTW_ESTIMATE: deterministic plans, and planning does not touch the arrays.
void dft3(const cdouble* in, cdouble* out, int n, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_3d(n, n, n,
                                reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in)),
                                reinterpret_cast<fftw_complex*>(out), sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
}

void dft2(const cdouble* in, cdouble* out, int n, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(n, n,
                                reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in)),
                                reinterpret_cast<fftw_complex*>(out), sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
}

} // namespace

double imag_residue(const std::vector<cdouble>& v) {
    double max_imag = 0.0, max_abs = 0.0;
    for (const cdouble& z : v) {
        max_imag = std::max(max_imag, std::abs(z.imag()));
        max_abs = std::max(max_abs, std::abs(z));
    }
    return max_abs > 0.0 ? max_imag / max_abs : 0.0;
}

FourierVolume fft3(const Volume3D& v) {
    require_even_side(v.side_n);
    std::vector<cdouble> in(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) in[i] = cdouble(v.data[i], 0.0);
    FourierVolume F(v.side_n, v.voxel_size);
    dft3(in.data(), F.data.data(), v.side_n, FFTW_FORWARD);
    return F;
}

std::vector<cdouble> ifft3_complex(const FourierVolume& F) {
    require_even_side(F.side_n);
    std::vector<cdouble> out(F.size());
    dft3(F.data.data(), out.data(), F.side_n, FFTW_BACKWARD);
    const double scale = 1.0 / double(F.size());
    for (cdouble& z : out) z *= scale;
    return out;
}

Volume3D ifft3(const FourierVolume& F, double tol) {
    std::vector<cdouble> out = ifft3_complex(F);
    double residue = imag_residue(out);
    if (residue > tol)
        throw NonHermitianInput("ifft3: relative imaginary residue " +
                                std::to_string(residue) + " exceeds tolerance");
    Volume3D v(F.side_n, F.voxel_size);
    for (std::size_t i = 0; i < out.size(); ++i) v.data[i] = out[i].real();
    return v;
}

Volume3D halfshift3(const Volume3D& v) {
    const int n = v.side_n;
    const int h = n / 2;
    Volume3D out(n, v.voxel_size);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                out.at(i, j, k) = v.at((i + h) % n, (j + h) % n, (k + h) % n);
    return out;
}

Image2D halfshift2(const Image2D& img) {
    const int n = img.side_n;
    const int h = n / 2;
    Image2D out(n, img.voxel_size);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out.at(i, j) = img.at((i + h) % n, (j + h) % n);
    return out;
}

FourierVolume fft3_centered(const Volume3D& v) { return fft3(halfshift3(v)); }

Volume3D ifft3_centered(const FourierVolume& F, double tol) {
    return halfshift3(ifft3(F, tol));
}

std::vector<cdouble> fft2(const Image2D& img) {
    std::vector<cdouble> in(img.data.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = cdouble(img.data[i], 0.0);
    std::vector<cdouble> out(in.size());
    dft2(in.data(), out.data(), img.side_n, FFTW_FORWARD);
    return out;
}

Image2D ifft2(const std::vector<cdouble>& f, int side_n, double voxel_size, double tol) {
    std::vector<cdouble> out(f.size());
    dft2(f.data(), out.data(), side_n, FFTW_BACKWARD);
    const double scale = 1.0 / double(f.size());
    for (cdouble& z : out) z *= scale;
    double residue = imag_residue(out);
    if (residue > tol)
        throw NonHermitianInput("ifft2: relative imaginary residue " +
                                std::to_string(residue) + " exceeds tolerance");
    Image2D img(side_n, voxel_size);
    for (std::size_t i = 0; i < out.size(); ++i) img.data[i] = out[i].real();
    return img;
}

std::vector<cdouble> fft2_centered(const Image2D& img) { return fft2(halfshift2(img)); }

Image2D ifft2_centered(const std::vector<cdouble>& f, int side_n, double voxel_size,
                       double tol) {
    return halfshift2(ifft2(f, side_n, voxel_size, tol));
}

} // namespace cryomap
