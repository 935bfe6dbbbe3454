#pragma once
#include <string>
#include <vector>

#include "dfield/geometry.hpp"
#include "dfield/recording.hpp"

namespace dfield {

enum class Normalization {
    symmetric, // divide by the geometric mean of the two channel powers
    reference, // divide by the power of channel p only
};

/// Time-average sample correlation of channels p and q. The symmetric
/// normalization is gain-robust and is the default; `reference` normalizes
/// by channel p's power alone. Throws on a silent channel.
double estimate_correlation(const Recording& rec, int p, int q,
                            Normalization norm = Normalization::symmetric);

struct CorrelationEntry {
    int p = 0;
    int q = 0;
    double distance = 0.0;
    double rho = 0.0;
};

struct CorrelationCurve {
    std::vector<CorrelationEntry> entries; // ascending distance
    std::string provenance;                // recording meta digest
};

/// Correlation for every unordered mic pair, tagged with pair distance and
/// sorted by distance.
CorrelationCurve correlation_curve(const Recording& rec, const ArrayGeometry& geom,
                                   Normalization norm = Normalization::symmetric);

struct DistanceVariance {
    double distance = 0.0; // bin representative (mean of member distances)
    double variance = 0.0; // unbiased sample variance of rho within the bin
    int count = 0;
};

/// Pools correlation samples from all curves into distance bins (samples
/// whose distances differ by at most `bin_tolerance` share a bin) and
/// returns the per-bin unbiased variance. Every bin must have >= 2 samples.
std::vector<DistanceVariance> variance_by_distance(const std::vector<CorrelationCurve>& curves,
                                                   double bin_tolerance = 5e-4);

double sum_of_variances(const std::vector<DistanceVariance>& per_distance);

/// CSV with provenance header: distance_m, rho_hat, pair_p, pair_q.
std::string curve_csv(const CorrelationCurve& curve, const std::string& provenance_line);

} // namespace dfield
