#pragma once
#include <algorithm>
#include <cmath>
#include <vector>

#include "dfield/recording.hpp"
#include "dfield/rng.hpp"
#include "dfield/simulate.hpp"

namespace dfield::testing {

inline Recording wrap_channels(std::vector<std::vector<double>> chans, double fs = 16000.0) {
    Recording r;
    r.sample_rate = fs;
    r.channels = std::move(chans);
    return r;
}

inline double channel_power(const std::vector<double>& x) {
    double p = 0.0;
    for (double v : x) p += v * v;
    return p / static_cast<double>(x.size());
}

/// Slowly varying gain curve within +-amp dB: a low-order cosine series in
/// log frequency, sampled densely so fractional-octave smoothing tracks it.
inline GainCurve smooth_gain_curve(Rng& rng, double amp_db, double f_lo = 250.0,
                                   double f_hi = 8000.0) {
    const double l0 = std::log(f_lo);
    const double l1 = std::log(f_hi);
    double a[3], ph[3];
    for (int h = 0; h < 3; ++h) {
        a[h] = rng.uniform(-1.0, 1.0);
        ph[h] = rng.uniform(0.0, 2.0 * M_PI);
    }
    const double base = rng.uniform(-0.4, 0.4);
    GainCurve g;
    for (double f = f_lo; f <= f_hi * 1.0001; f *= std::pow(2.0, 1.0 / 24.0)) {
        const double t = (std::log(f) - l0) / (l1 - l0);
        double v = base;
        for (int h = 0; h < 3; ++h) v += a[h] * std::cos((h + 1) * M_PI * t + ph[h]) / (h + 1.5);
        g.points.emplace_back(f, std::clamp(v * amp_db * 0.7, -amp_db, amp_db));
    }
    return g;
}

} // namespace dfield::testing
