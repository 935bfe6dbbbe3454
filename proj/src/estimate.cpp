#include "dfield/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dfield/util.hpp"

namespace dfield {

namespace {
constexpr double kSilentPower = 1e-30;
}

double estimate_correlation(const Recording& rec, int p, int q, Normalization norm) {
    rec.validate();
    const int m = static_cast<int>(rec.channel_count());
    if (p < 0 || p >= m || q < 0 || q >= m)
        throw std::invalid_argument("estimate_correlation: channel index out of range");
    if (rec.duration() < 1.0)
        throw std::invalid_argument("estimate_correlation: recording shorter than 1 s");
    if (p == q) return 1.0;

    const auto& a = rec.channels[p];
    const auto& b = rec.channels[q];
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += a[i] * b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
    }
    const double nsamp = static_cast<double>(a.size());
    if (saa / nsamp < kSilentPower || sbb / nsamp < kSilentPower)
        throw std::invalid_argument("estimate_correlation: silent channel");
    return norm == Normalization::symmetric ? sab / std::sqrt(saa * sbb) : sab / saa;
}

CorrelationCurve correlation_curve(const Recording& rec, const ArrayGeometry& geom,
                                   Normalization norm) {
    rec.validate();
    if (rec.channel_count() != geom.size())
        throw std::invalid_argument("correlation_curve: channel count != mic count");

    CorrelationCurve curve;
    for (const auto& pd : pair_distances(geom))
        curve.entries.push_back(
            {pd.p, pd.q, pd.distance, estimate_correlation(rec, pd.p, pd.q, norm)});
    std::sort(curve.entries.begin(), curve.entries.end(),
              [](const CorrelationEntry& x, const CorrelationEntry& y) {
                  if (x.distance != y.distance) return x.distance < y.distance;
                  return std::pair(x.p, x.q) < std::pair(y.p, y.q);
              });
    curve.provenance = to_hex(fnv1a(rec.meta));
    return curve;
}

std::vector<DistanceVariance> variance_by_distance(const std::vector<CorrelationCurve>& curves,
                                                   double bin_tolerance) {
    std::vector<std::pair<double, double>> samples; // (distance, rho)
    for (const auto& c : curves)
        for (const auto& e : c.entries) samples.emplace_back(e.distance, e.rho);
    if (samples.empty()) throw std::invalid_argument("variance_by_distance: no samples");
    std::sort(samples.begin(), samples.end());

    std::vector<DistanceVariance> out;
    std::size_t i = 0;
    while (i < samples.size()) {
        std::size_t j = i + 1;
        while (j < samples.size() && samples[j].first - samples[i].first <= bin_tolerance) ++j;
        const std::size_t count = j - i;
        if (count < 2)
            throw std::invalid_argument(
                "variance_by_distance: a distance bin has fewer than 2 samples");
        double mean_d = 0.0, mean_r = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            mean_d += samples[k].first;
            mean_r += samples[k].second;
        }
        mean_d /= static_cast<double>(count);
        mean_r /= static_cast<double>(count);
        double ss = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            const double dv = samples[k].second - mean_r;
            ss += dv * dv;
        }
        out.push_back({mean_d, ss / static_cast<double>(count - 1), static_cast<int>(count)});
        i = j;
    }
    return out;
}

double sum_of_variances(const std::vector<DistanceVariance>& per_distance) {
    if (per_distance.empty()) throw std::invalid_argument("sum_of_variances: empty input");
    double s = 0.0;
    for (const auto& d : per_distance) s += d.variance;
    return s;
}

std::string curve_csv(const CorrelationCurve& curve, const std::string& provenance_line) {
    std::string out;
    if (!provenance_line.empty()) out += "# " + provenance_line + "\n";
    out += "distance_m,rho_hat,pair_p,pair_q\n";
    for (const auto& e : curve.entries) {
        out += format_double(e.distance);
        out += ',';
        out += format_double(e.rho);
        out += ',';
        out += std::to_string(e.p);
        out += ',';
        out += std::to_string(e.q);
        out += '\n';
    }
    return out;
}

} // namespace dfield
