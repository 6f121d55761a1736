#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

#include "lbvs/hvs.hpp"

namespace lbvs {

namespace {

// FFTW's planner is not thread safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

double raw_csf(double f) {
    const double u = 0.114 * f;
    return (0.0192 + u) * std::exp(-std::pow(u, 1.1));
}

double find_peak_frequency() {
    // Golden-section search; the curve is unimodal on (0, 100).
    double a = 0.0, b = 100.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    for (int it = 0; it < 200; ++it) {
        if (raw_csf(c) > raw_csf(d))
            b = d;
        else
            a = c;
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    return 0.5 * (a + b);
}

}  // namespace

double csf_peak_frequency() {
    static const double peak = find_peak_frequency();
    return peak;
}

double csf_gain(double cycles_per_degree) {
    static const double peak_value = raw_csf(csf_peak_frequency());
    return raw_csf(cycles_per_degree) / peak_value;
}

Field2D csf_filter(const Field2D& luma, const ViewingGeometry& geom, CsfVariant variant) {
    if (!field_all_finite(luma)) throw DataError("csf_filter: non-finite input");
    if (variant == CsfVariant::Identity) return luma;
    if (!geom.valid() || !(geom.pixels_per_degree() > 0.0))
        throw DataError("csf_filter: degenerate viewing geometry");

    const int w = luma.width, h = luma.height;
    const double ppd = geom.pixels_per_degree();
    const int half_w = w / 2 + 1;

    std::vector<double> spatial(luma.v);
    std::vector<fftw_complex> freq(static_cast<std::size_t>(h) * half_w);

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd = fftw_plan_dft_r2c_2d(h, w, spatial.data(), freq.data(), FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(h, w, freq.data(), spatial.data(), FFTW_ESTIMATE);
    }
    fftw_execute(fwd);

    for (int iy = 0; iy < h; ++iy) {
        const double fy = (iy <= h / 2 ? iy : iy - h) / static_cast<double>(h);
        for (int ix = 0; ix < half_w; ++ix) {
            const double fx = ix / static_cast<double>(w);
            double gain;
            if (ix == 0 && iy == 0) {
                gain = 1.0;  // DC forced to 1: the field mean must survive
            } else {
                gain = csf_gain(ppd * std::sqrt(fx * fx + fy * fy));
            }
            auto& bin = freq[static_cast<std::size_t>(iy) * half_w + ix];
            bin[0] *= gain;
            bin[1] *= gain;
        }
    }

    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }

    Field2D out(w, h);
    const double norm = 1.0 / (static_cast<double>(w) * h);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = spatial[i] * norm;
    return out;
}

}  // namespace lbvs
