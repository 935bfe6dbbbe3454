#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "dfield/band.hpp"
#include "dfield/estimate.hpp"
#include "dfield/geometry.hpp"

namespace dfield {

/// One cell of the fixed-vs-perturbed variance study.
struct VarianceRow {
    int speaker_count = 0;
    std::string mode; // "fixed" or "proposed"
    double sum_of_variances = 0.0;
};

struct CampaignConfig {
    LoudspeakerLayout layout;
    ArrayGeometry geometry;
    BandSpec band = BandSpec::from_hz(500.0, 4500.0);
    double sample_rate = 16000.0;
    double duration_s = 30.0;
    std::vector<int> speaker_counts = {1, 2, 4, 8, 16, 26};
    int trials = 20;
    int segments = 120; // poses per perturbed capture
    std::uint64_t base_seed = 1;
    double bin_tolerance = 5e-4;
    int workers = 0; // 0 = hardware concurrency
};

struct CampaignResult {
    std::vector<VarianceRow> rows;
    // per (count, mode): pooled per-distance variances, for bin-level checks
    struct Cell {
        int speaker_count = 0;
        std::string mode;
        std::vector<DistanceVariance> per_distance;
    };
    std::vector<Cell> cells;

    double sum_for(int speaker_count, const std::string& mode) const;
    const Cell& cell_for(int speaker_count, const std::string& mode) const;
};

/// Runs the matched-seed campaign behind Table-1-style variance studies.
/// Both modes of a (count, trial) cell share the drive seed; "fixed" holds
/// the array at the trajectory's first pose for the whole capture, and
/// "proposed" runs the full multi-segment trajectory from the same seed.
/// Trials run in parallel; output is independent of worker count.
CampaignResult run_variance_campaign(const CampaignConfig& cfg);

/// Table-1-shaped CSV: speakers,fixed,proposed.
std::string variance_table_csv(const CampaignResult& result, const std::string& provenance_line);

} // namespace dfield
