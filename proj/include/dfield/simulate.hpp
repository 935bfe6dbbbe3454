#pragma once
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dfield/band.hpp"
#include "dfield/geometry.hpp"
#include "dfield/recording.hpp"

namespace dfield {

enum class NoiseColor { white, pink };

/// Per-channel magnitude shaping in dB vs Hz, linearly interpolated between
/// control points and clamped outside them. Applied zero-phase. An empty
/// curve is unity.
struct GainCurve {
    std::vector<std::pair<double, double>> points; // (hz, dB), ascending hz

    static GainCurve flat(double db) { return {{{0.0, db}}}; }
    bool unity() const { return points.empty(); }
    double db_at(double hz) const;
    double amplitude_at(double hz) const { return std::pow(10.0, db_at(hz) / 20.0); }
};

struct CaptureConfig {
    BandSpec band = BandSpec::from_hz(500.0, 4500.0);
    double duration_s = 30.0;
    double sample_rate = 16000.0;
    int speaker_count = 1;
    std::optional<Trajectory> trajectory;  // absent = fixed array at identity pose
    std::vector<GainCurve> channel_gains;  // empty, or one per mic
    NoiseColor noise = NoiseColor::white;
    std::uint64_t seed = 0;
};

/// `count` mutually independent bandpass noise channels: flat (or pink)
/// magnitude inside the band, zero outside, random phase. Unit RMS each.
/// Deterministic in the seed; channel s depends only on (seed, s).
std::vector<std::vector<double>> synth_speaker_drives(int count, const BandSpec& band,
                                                      double duration_s, double fs,
                                                      std::uint64_t seed,
                                                      NoiseColor color = NoiseColor::white);

/// Far-field plane-wave render: each mic channel is the sum over speakers of
/// that speaker's drive delayed by (x_mic . y_hat) / c, with y_hat the unit
/// propagation direction (speaker toward origin). With a trajectory the
/// render is segment-wise with the posed geometry per segment; per-channel
/// gain curves are applied last. Rendering is frequency-domain, so
/// fractional delays are exact at the transform resolution.
Recording render_capture(const LoudspeakerLayout& layout, const ArrayGeometry& geom,
                         const CaptureConfig& cfg);

/// Ideal diffuse-field reference render: a superposition of num_directions
/// independent plane waves from a deterministic quasi-uniform direction set
/// (Fibonacci sphere), each carrying an independent random-phase bandpass
/// drive. The estimated correlation of this render converges to the wideband
/// closed form as num_directions grows.
Recording render_diffuse_oracle(const ArrayGeometry& geom, const BandSpec& band,
                                int num_directions, double duration_s, double fs,
                                std::uint64_t seed);

/// Deterministic quasi-uniform unit directions.
std::vector<Vec3> fibonacci_sphere(int n);

} // namespace dfield
