#pragma once
#include <filesystem>
#include <string>
#include <vector>

#include "dfield/config.hpp"

namespace dfield::cli {

/// Usage-level failure (bad arguments, missing inputs): exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kVersion = "0.1.0";

/// Theory curves: distance vs closed form / band quadrature / narrowband /
/// two-term approximation. Writes theory.csv.
void cmd_theory(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Renders a capture per the config and writes capture.wav (+ sidecar).
void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Per-recording correlation curves; with `campaign.trials` set (or when
/// sidecar groups contain repeated trials) also the fixed-vs-proposed
/// variance table.
void cmd_analyze(const RunConfig& cfg, const std::vector<std::filesystem::path>& recordings,
                 const std::filesystem::path& out_dir);

/// Full calibration pipeline on one multichannel recording: profile.json,
/// offsets.csv, optionally calibrated.wav. Prints the 1 kHz trim statistic.
void cmd_calibrate(const RunConfig& cfg, const std::filesystem::path& recording,
                   const std::filesystem::path& out_dir);

std::string provenance_line(const std::string& command, const RunConfig& cfg);

} // namespace dfield::cli
