#pragma once
#include <string>
#include <vector>

#include "dfield/band.hpp"
#include "dfield/recording.hpp"

namespace dfield {

struct WelchConfig {
    int segment_length = 4096; // samples, power of two
    double overlap = 0.5;      // fraction of segment_length
};

/// Per-channel magnitude responses from averaged Hann periodograms, in dB
/// (10 log10 of the power spectral density, so channel gain differences read
/// directly in amplitude dB). Frequencies are the FFT bin grid.
struct MagnitudeSpectra {
    std::vector<double> freq_hz;
    std::vector<std::vector<double>> magnitude_db; // [channel][bin]
    BandSpec band = BandSpec::from_hz(500.0, 4500.0);
    WelchConfig welch;
    int averages = 0;

    std::size_t channel_count() const { return magnitude_db.size(); }
    /// Indices of freq_hz inside the analysis band.
    std::vector<std::size_t> in_band_indices() const;
};

MagnitudeSpectra estimate_magnitude_response(const Recording& rec, const BandSpec& analysis_band,
                                             const WelchConfig& cfg = {});

/// Per-channel dB offsets (magnitude minus the across-channel mean at every
/// frequency, so offsets sum to zero) plus derived calibration filters.
struct CalibrationProfile {
    std::vector<double> freq_hz;
    std::vector<std::vector<double>> offset_db;    // [channel][bin], zero-sum
    std::vector<std::vector<double>> filter_taps;  // empty until designed
    double trim_stat_1khz_db = 0.0;                // spread at 1 kHz when computed
    BandSpec band = BandSpec::from_hz(500.0, 4500.0);
    double sample_rate = 0.0;

    std::size_t channel_count() const { return offset_db.size(); }
};

/// Mean-subtracted offset curves (no filters yet).
CalibrationProfile relative_offsets(const MagnitudeSpectra& spectra);

struct TrimDrift {
    double spread_db = 0.0;              // max - min across channels at f0
    std::vector<double> per_channel_db;  // offsets interpolated to f0
};

/// Spread of the mean-subtracted offsets at a single frequency (the trim
/// statistic; 1 kHz for the usual spherical-array check).
TrimDrift trim_drift_at(const MagnitudeSpectra& spectra, double f0_hz);
TrimDrift trim_drift_at(const CalibrationProfile& profile, double f0_hz);

struct FilterDesign {
    double smoothing_octaves = 1.0 / 6.0;
    int filter_length = 1025; // odd (type-I linear phase)
    double in_band_tolerance_db = 0.1;
    double out_band_tolerance_db = 3.0;
};

/// Linear-phase FIR inverse-magnitude filters from fractional-octave
/// smoothed offsets via frequency sampling. In-band the filter matches
/// -offset within the tolerance; out of band it stays within the out-band
/// tolerance of unity. Throws when the spec cannot be met at this length.
CalibrationProfile design_calibration_filters(const CalibrationProfile& offsets,
                                              const FilterDesign& design = {});

/// Convolves each channel with its calibration filter (output delayed by the
/// filter group delay, same length as the input).
Recording apply_calibration(const Recording& rec, const CalibrationProfile& profile);

/// Moving fractional-octave average of a dB curve; the averaging window is
/// clipped to the analysis band so out-of-band bins never leak in.
std::vector<double> fractional_octave_smooth(const std::vector<double>& freq_hz,
                                             const std::vector<double>& values_db,
                                             double octaves, const BandSpec& band);

/// Profile serialization: JSON (channels[i].offset_db[], freq_hz[],
/// filter_taps[], trim_stat_1khz_db) and a plottable offsets CSV.
std::string profile_json(const CalibrationProfile& profile);
CalibrationProfile profile_from_json(const std::string& text);
std::string offsets_csv(const CalibrationProfile& profile, const std::string& provenance_line);

} // namespace dfield
