#include "cryomap/curve_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "cryomap/errors.hpp"

namespace cryomap {

namespace {

constexpr double kThreshold = 0.143;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fmt_px(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void require_shared_axis(const std::vector<NamedCurve>& curves) {
    if (curves.empty()) throw InvalidArgument("emit_curve: no curves given");
    const FSCCurve& first = curves.front().curve;
    if (first.value.empty()) throw InvalidArgument("emit_curve: empty curve");
    for (const NamedCurve& nc : curves) {
        if (nc.curve.value.size() != first.value.size() ||
            nc.curve.side_n != first.side_n ||
            nc.curve.voxel_size != first.voxel_size)
            throw InvalidArgument("emit_curve: curves do not share a shell axis");
    }
}

void emit_csv(std::ofstream& out, const std::vector<NamedCurve>& curves) {
    out << "shell_radius,freq_inv_A";
    for (const NamedCurve& nc : curves) out << ',' << nc.name;
    out << '\n';
    const FSCCurve& axis = curves.front().curve;
    for (std::size_t r = 0; r < axis.value.size(); ++r) {
        out << r << ',' << fmt(axis.freq(double(r)));
        for (const NamedCurve& nc : curves) out << ',' << fmt(nc.curve.value[r]);
        out << '\n';
    }
}

void emit_svg(std::ofstream& out, const std::vector<NamedCurve>& curves) {
    const int width = 640, height = 480;
    const double left = 64.0, right = 24.0, top = 24.0, bottom = 56.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    const FSCCurve& axis = curves.front().curve;
    const double x_max = double(axis.value.size() - 1);
    const double y_min = -1.05, y_max = 1.05;

    auto sx = [&](double shell) { return left + plot_w * (x_max > 0 ? shell / x_max : 0.0); };
    auto sy = [&](double v) {
        const double t = (v - y_min) / (y_max - y_min);
        return top + plot_h * (1.0 - std::clamp(t, 0.0, 1.0));
    };

    static const char* kPalette[] = {"#1f6fb2", "#d1581a", "#2f8c47",
                                     "#a03ca0", "#8c6d31", "#3c9ea0"};
    const std::size_t n_colors = sizeof kPalette / sizeof kPalette[0];

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    // Axes.
    out << "<line x1=\"" << fmt_px(left) << "\" y1=\"" << fmt_px(top + plot_h)
        << "\" x2=\"" << fmt_px(left + plot_w) << "\" y2=\"" << fmt_px(top + plot_h)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << fmt_px(left) << "\" y1=\"" << fmt_px(top) << "\" x2=\""
        << fmt_px(left) << "\" y2=\"" << fmt_px(top + plot_h)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    // Horizontal gridline at zero and reference line at the threshold.
    out << "<line x1=\"" << fmt_px(left) << "\" y1=\"" << fmt_px(sy(0.0)) << "\" x2=\""
        << fmt_px(left + plot_w) << "\" y2=\"" << fmt_px(sy(0.0))
        << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    out << "<line class=\"threshold\" x1=\"" << fmt_px(left) << "\" y1=\""
        << fmt_px(sy(kThreshold)) << "\" x2=\"" << fmt_px(left + plot_w) << "\" y2=\""
        << fmt_px(sy(kThreshold))
        << "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n";
    out << "<text x=\"" << fmt_px(left + plot_w - 4.0) << "\" y=\""
        << fmt_px(sy(kThreshold) - 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" "
           "fill=\"#555555\">0.143</text>\n";
    // Curves.
    for (std::size_t c = 0; c < curves.size(); ++c) {
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[c % n_colors]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t r = 0; r < curves[c].curve.value.size(); ++r) {
            if (r) out << ' ';
            out << fmt_px(sx(double(r))) << ',' << fmt_px(sy(curves[c].curve.value[r]));
        }
        out << "\"/>\n";
    }
    // Axis labels.
    out << "<text x=\"" << fmt_px(left + plot_w / 2.0) << "\" y=\""
        << fmt_px(double(height) - 16.0)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
           "shell radius (freq = r / (n·voxel) 1/Å)</text>\n";
    out << "<text x=\"20\" y=\"" << fmt_px(top + plot_h / 2.0)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 20 "
        << fmt_px(top + plot_h / 2.0) << ")\">shell correlation</text>\n";
    // Legend.
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const double ly = top + 8.0 + 18.0 * double(c);
        out << "<rect x=\"" << fmt_px(left + 12.0) << "\" y=\"" << fmt_px(ly)
            << "\" width=\"18\" height=\"4\" fill=\"" << kPalette[c % n_colors]
            << "\"/>\n";
        out << "<text x=\"" << fmt_px(left + 36.0) << "\" y=\"" << fmt_px(ly + 6.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << curves[c].name
            << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace

void emit_curve(const std::string& path, const std::vector<NamedCurve>& curves,
                CurveFormat format) {
    require_shared_axis(curves);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("emit_curve: cannot open " + path);
    if (format == CurveFormat::csv)
        emit_csv(out, curves);
    else
        emit_svg(out, curves);
    if (!out) throw IoError("emit_curve: short write to " + path);
}

} // namespace cryomap
