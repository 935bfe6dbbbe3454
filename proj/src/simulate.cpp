#include "dfield/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <future>
#include <stdexcept>

#include <json.hpp>

#include "dfield/fft.hpp"
#include "dfield/rng.hpp"
#include "dfield/util.hpp"

namespace dfield {

namespace {

using cplx = std::complex<double>;

struct BandBins {
    std::size_t lo = 0; // first in-band bin (inclusive)
    std::size_t hi = 0; // last in-band bin (inclusive)
    std::size_t count() const { return hi >= lo ? hi - lo + 1 : 0; }
};

BandBins band_bins(std::size_t p, double fs, const BandSpec& band) {
    const double df = fs / static_cast<double>(p);
    auto lo = static_cast<std::size_t>(std::ceil(band.low_hz() / df));
    auto hi = static_cast<std::size_t>(std::floor(band.high_hz() / df));
    lo = std::max<std::size_t>(lo, 1);          // skip DC
    hi = std::min<std::size_t>(hi, p / 2 - 1);  // skip Nyquist
    if (hi < lo) throw std::invalid_argument("band too narrow for this length/sample rate");
    return {lo, hi};
}

/// Random-phase drive spectrum on the circle of length p: half-spectrum with
/// unity-RMS scaling, in-band bins only. Pink shaping weights 1/sqrt(f).
std::vector<cplx> drive_half_spectrum(std::size_t p, double fs, const BandSpec& band,
                                      NoiseColor color, std::uint64_t stream_seed) {
    const BandBins bb = band_bins(p, fs, band);
    std::vector<cplx> half(p / 2 + 1, cplx(0.0, 0.0));
    const double df = fs / static_cast<double>(p);

    double sum_a2 = 0.0;
    if (color == NoiseColor::white) {
        sum_a2 = static_cast<double>(bb.count());
    } else {
        for (std::size_t k = bb.lo; k <= bb.hi; ++k) sum_a2 += 1.0 / (df * k);
    }
    const double scale = static_cast<double>(p) / std::sqrt(2.0 * sum_a2);

    Rng rng(stream_seed);
    for (std::size_t k = bb.lo; k <= bb.hi; ++k) {
        const double amp =
            color == NoiseColor::white ? scale : scale / std::sqrt(df * k);
        const double phase = 2.0 * M_PI * rng.uniform();
        half[k] = cplx(amp * std::cos(phase), amp * std::sin(phase));
    }
    return half;
}

std::vector<double> real_signal_from_half(const std::vector<cplx>& half, std::size_t p) {
    std::vector<cplx> full(p, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < half.size() && k <= p / 2; ++k) full[k] = half[k];
    for (std::size_t k = 1; k < p / 2; ++k) full[p - k] = std::conj(half[k]);
    fft::inverse(full);
    std::vector<double> out(p);
    for (std::size_t n = 0; n < p; ++n) out[n] = full[n].real();
    return out;
}

/// acc += spec * e^{-i theta k} over bins [k_lo, k_hi], iterative phasor with
/// periodic exact refresh.
void accumulate_ramped(std::vector<double>& acc_re, std::vector<double>& acc_im,
                       const std::vector<cplx>& spec, double theta, std::size_t k_lo,
                       std::size_t k_hi) {
    double rr = std::cos(-theta * static_cast<double>(k_lo));
    double ri = std::sin(-theta * static_cast<double>(k_lo));
    const double cr = std::cos(-theta);
    const double ci = std::sin(-theta);
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        const double sr = spec[k].real();
        const double si = spec[k].imag();
        acc_re[k] += sr * rr - si * ri;
        acc_im[k] += sr * ri + si * rr;
        const double nr = rr * cr - ri * ci;
        ri = rr * ci + ri * cr;
        rr = nr;
        if ((k & 2047U) == 2047U) {
            rr = std::cos(-theta * static_cast<double>(k + 1));
            ri = std::sin(-theta * static_cast<double>(k + 1));
        }
    }
}

std::vector<std::size_t> speaker_subset(const LoudspeakerLayout& layout, int count) {
    const int avail = static_cast<int>(layout.size());
    if (count < 1 || count > avail)
        throw std::invalid_argument("speaker_count out of range for layout");
    if (count == avail) {
        std::vector<std::size_t> all(layout.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    std::vector<Vec3> dirs;
    dirs.reserve(layout.size());
    for (const auto& p : layout.speaker_positions) dirs.push_back(normalize(p));
    std::vector<std::size_t> out;
    for (int i : max_min_angle_subset(dirs, count)) out.push_back(static_cast<std::size_t>(i));
    return out;
}

struct SegmentSpan {
    std::size_t start = 0;
    std::size_t length = 0;
    Pose pose;
};

std::vector<SegmentSpan> segment_spans(const Trajectory& traj, std::size_t frames, double fs) {
    std::vector<SegmentSpan> spans;
    double cum = 0.0;
    std::size_t covered = 0;
    for (const auto& seg : traj.segments) {
        if (!(seg.duration > 0.0)) throw std::invalid_argument("trajectory segment duration <= 0");
        const auto s0 = covered;
        cum += seg.duration;
        const auto s1 = std::min<std::size_t>(frames, static_cast<std::size_t>(std::llround(cum * fs)));
        if (s1 > s0) spans.push_back({s0, s1 - s0, seg.pose});
        covered = std::max(covered, s1);
        if (covered >= frames) break;
    }
    if (covered < frames)
        throw std::invalid_argument("trajectory shorter than the capture duration");
    return spans;
}

} // namespace

double GainCurve::db_at(double hz) const {
    if (points.empty()) return 0.0;
    if (hz <= points.front().first) return points.front().second;
    if (hz >= points.back().first) return points.back().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (hz <= points[i].first) {
            const auto& [f0, g0] = points[i - 1];
            const auto& [f1, g1] = points[i];
            const double t = (hz - f0) / (f1 - f0);
            return g0 + t * (g1 - g0);
        }
    }
    return points.back().second;
}

std::vector<std::vector<double>> synth_speaker_drives(int count, const BandSpec& band,
                                                      double duration_s, double fs,
                                                      std::uint64_t seed, NoiseColor color) {
    if (count < 1) throw std::invalid_argument("synth_speaker_drives: count must be >= 1");
    if (!(duration_s > 0.0)) throw std::invalid_argument("synth_speaker_drives: duration <= 0");
    if (!(fs > band.omega_max() / M_PI))
        throw std::invalid_argument("sample rate too low for band (aliasing)");
    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
    const std::size_t p = fft::next_pow2(n);

    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        const auto half = drive_half_spectrum(p, fs, band, color, mix_seed(seed, s));
        auto x = real_signal_from_half(half, p);
        x.resize(n);
        out.push_back(std::move(x));
    }
    return out;
}

Recording render_capture(const LoudspeakerLayout& layout, const ArrayGeometry& geom,
                         const CaptureConfig& cfg) {
    const double fs = cfg.sample_rate;
    const double c = PhysicalConstants{}.speed_of_sound;
    if (!(cfg.duration_s > 0.0)) throw std::invalid_argument("render: duration <= 0");
    if (!(fs > cfg.band.omega_max() / M_PI))
        throw std::invalid_argument("sample rate too low for band (aliasing)");
    if (!cfg.channel_gains.empty() && cfg.channel_gains.size() != geom.size())
        throw std::invalid_argument("render: channel gain count != mic count");

    const auto speakers = speaker_subset(layout, cfg.speaker_count);
    const std::size_t m = geom.size();
    const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s * fs));

    const Trajectory traj =
        cfg.trajectory ? *cfg.trajectory : Trajectory::fixed(cfg.duration_s);
    const auto spans = segment_spans(traj, n, fs);

    bool farfield_warning = false;
    if (geom.extent() > layout.radius / 4.0) {
        farfield_warning = true;
        std::fprintf(stderr,
                     "dfield: warning: array extent %.3f m exceeds a quarter of the shell "
                     "radius %.3f m; far-field assumption degrades\n",
                     geom.extent(), layout.radius);
    }
    for (const auto& sp : spans) {
        for (const auto& mic : geom.mic_positions) {
            if (norm(sp.pose.rotation * mic + sp.pose.translation) >= layout.radius)
                throw std::invalid_argument("trajectory pose escapes the loudspeaker shell");
        }
    }

    // transform sizing: guard for the largest |delay|, one length for all segments
    const auto tau_guard = static_cast<std::size_t>(std::ceil(fs * layout.radius / c)) + 8;
    std::size_t l_max = 0;
    for (const auto& sp : spans) l_max = std::max(l_max, sp.length);
    const std::size_t lp = fft::next_pow2(l_max + 2 * tau_guard);
    const std::size_t guard = (lp - l_max) / 2;
    const std::size_t p = std::max(fft::next_pow2(n), lp);

    // circular drives
    std::vector<std::vector<double>> drive(speakers.size());
    for (std::size_t s = 0; s < speakers.size(); ++s) {
        const auto half = drive_half_spectrum(p, fs, cfg.band, cfg.noise, mix_seed(cfg.seed, s));
        drive[s] = real_signal_from_half(half, p);
    }
    std::vector<Vec3> prop_dirs;
    prop_dirs.reserve(speakers.size());
    for (std::size_t idx : speakers) prop_dirs.push_back(layout.propagation_direction(idx));

    Recording rec;
    rec.sample_rate = fs;
    rec.channels.assign(m, std::vector<double>(n, 0.0));

    const std::size_t half_lp = lp / 2;
    std::vector<std::vector<cplx>> spk_spec(speakers.size());
    std::vector<cplx> buf(lp);
    std::vector<double> acc_re(half_lp + 1), acc_im(half_lp + 1);

    for (const auto& sp : spans) {
        // slice each speaker drive around the segment (circular) and transform
        for (std::size_t s = 0; s < speakers.size(); ++s) {
            const auto& x = drive[s];
            const std::size_t base = (sp.start + p - (guard % p)) % p;
            for (std::size_t i = 0; i < lp; ++i) buf[i] = cplx(x[(base + i) & (p - 1)], 0.0);
            fft::forward(buf);
            spk_spec[s].assign(buf.begin(), buf.begin() + static_cast<long>(half_lp + 1));
        }
        for (std::size_t mi = 0; mi < m; ++mi) {
            const Vec3 pos = sp.pose.rotation * geom.mic_positions[mi] + sp.pose.translation;
            std::fill(acc_re.begin(), acc_re.end(), 0.0);
            std::fill(acc_im.begin(), acc_im.end(), 0.0);
            for (std::size_t s = 0; s < speakers.size(); ++s) {
                const double shift = dot(pos, prop_dirs[s]) / c * fs; // samples
                const double theta = 2.0 * M_PI * shift / static_cast<double>(lp);
                accumulate_ramped(acc_re, acc_im, spk_spec[s], theta, 0, half_lp);
            }
            for (std::size_t k = 0; k <= half_lp; ++k) buf[k] = cplx(acc_re[k], acc_im[k]);
            for (std::size_t k = 1; k < half_lp; ++k) buf[lp - k] = std::conj(buf[k]);
            fft::inverse(buf);
            auto& ch = rec.channels[mi];
            for (std::size_t i = 0; i < sp.length; ++i) ch[sp.start + i] = buf[guard + i].real();
        }
    }

    // per-channel magnitude shaping, zero phase
    if (!cfg.channel_gains.empty()) {
        const std::size_t p2 = fft::next_pow2(n);
        std::vector<cplx> cb(p2);
        for (std::size_t mi = 0; mi < m; ++mi) {
            const auto& gc = cfg.channel_gains[mi];
            if (gc.unity()) continue;
            std::fill(cb.begin(), cb.end(), cplx(0.0, 0.0));
            for (std::size_t i = 0; i < n; ++i) cb[i] = cplx(rec.channels[mi][i], 0.0);
            fft::forward(cb);
            for (std::size_t k = 0; k <= p2 / 2; ++k) {
                const double f = k * fs / static_cast<double>(p2);
                const double g = gc.amplitude_at(f);
                cb[k] *= g;
                if (k != 0 && k != p2 / 2) cb[p2 - k] *= g;
            }
            fft::inverse(cb);
            for (std::size_t i = 0; i < n; ++i) rec.channels[mi][i] = cb[i].real();
        }
    }

    nlohmann::json meta;
    meta["band_hz"] = {cfg.band.low_hz(), cfg.band.high_hz()};
    meta["fs_hz"] = fs;
    meta["duration_s"] = cfg.duration_s;
    meta["seed"] = cfg.seed;
    meta["speakers"] = cfg.speaker_count;
    meta["mics"] = m;
    meta["segments"] = spans.size();
    meta["perturbed"] = cfg.trajectory.has_value() && cfg.trajectory->segments.size() > 1;
    meta["trajectory_digest"] = to_hex(trajectory_digest(traj));
    meta["noise"] = cfg.noise == NoiseColor::white ? "white" : "pink";
    if (farfield_warning) meta["farfield_warning"] = true;
    rec.meta = meta.dump(2);
    return rec;
}

std::vector<Vec3> fibonacci_sphere(int n) {
    if (n < 1) throw std::invalid_argument("fibonacci_sphere: n must be >= 1");
    std::vector<Vec3> dirs;
    dirs.reserve(n);
    const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * i;
        dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return dirs;
}

Recording render_diffuse_oracle(const ArrayGeometry& geom, const BandSpec& band,
                                int num_directions, double duration_s, double fs,
                                std::uint64_t seed) {
    if (num_directions < 100)
        throw std::invalid_argument("render_diffuse_oracle: need at least 100 directions");
    if (!(duration_s > 0.0)) throw std::invalid_argument("render_diffuse_oracle: duration <= 0");
    if (!(fs > band.omega_max() / M_PI))
        throw std::invalid_argument("sample rate too low for band (aliasing)");

    const double c = PhysicalConstants{}.speed_of_sound;
    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
    const std::size_t p = fft::next_pow2(n);
    const BandBins bb = band_bins(p, fs, band);
    const std::size_t nb = bb.count();
    const std::size_t m = geom.size();
    const auto dirs = fibonacci_sphere(num_directions);

    const double amp = static_cast<double>(p) /
                       std::sqrt(2.0 * static_cast<double>(nb) * num_directions);

    // fixed chunking so the accumulation order (and hence the output) does
    // not depend on how many workers run
    constexpr int kChunks = 8;
    struct Partial {
        std::vector<std::vector<double>> re, im; // [mic][band bin]
    };
    auto run_chunk = [&](int chunk) {
        Partial part;
        part.re.assign(m, std::vector<double>(nb, 0.0));
        part.im.assign(m, std::vector<double>(nb, 0.0));
        std::vector<double> xr(nb), xi(nb);
        std::vector<double> shift(m);
        const int d0 = static_cast<int>(static_cast<long long>(num_directions) * chunk / kChunks);
        const int d1 =
            static_cast<int>(static_cast<long long>(num_directions) * (chunk + 1) / kChunks);
        for (int d = d0; d < d1; ++d) {
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(d)));
            for (std::size_t i = 0; i < nb; ++i) {
                const double phase = 2.0 * M_PI * rng.uniform();
                xr[i] = amp * std::cos(phase);
                xi[i] = amp * std::sin(phase);
            }
            for (std::size_t mi = 0; mi < m; ++mi)
                shift[mi] = dot(geom.mic_positions[mi], dirs[d]) / c * fs;
            for (std::size_t mi = 0; mi < m; ++mi) {
                const double theta = 2.0 * M_PI * shift[mi] / static_cast<double>(p);
                double rr = std::cos(-theta * static_cast<double>(bb.lo));
                double ri = std::sin(-theta * static_cast<double>(bb.lo));
                const double cr = std::cos(-theta);
                const double ci = std::sin(-theta);
                auto& are = part.re[mi];
                auto& aim = part.im[mi];
                for (std::size_t i = 0; i < nb; ++i) {
                    are[i] += xr[i] * rr - xi[i] * ri;
                    aim[i] += xr[i] * ri + xi[i] * rr;
                    const double nr = rr * cr - ri * ci;
                    ri = rr * ci + ri * cr;
                    rr = nr;
                    if ((i & 2047U) == 2047U) {
                        const double th = -theta * static_cast<double>(bb.lo + i + 1);
                        rr = std::cos(th);
                        ri = std::sin(th);
                    }
                }
            }
        }
        return part;
    };

    std::vector<std::future<Partial>> futures;
    futures.reserve(kChunks);
    for (int chunk = 0; chunk < kChunks; ++chunk)
        futures.push_back(std::async(std::launch::async, run_chunk, chunk));

    std::vector<std::vector<double>> acc_re(m, std::vector<double>(nb, 0.0));
    std::vector<std::vector<double>> acc_im(m, std::vector<double>(nb, 0.0));
    for (auto& f : futures) {
        const Partial part = f.get();
        for (std::size_t mi = 0; mi < m; ++mi)
            for (std::size_t i = 0; i < nb; ++i) {
                acc_re[mi][i] += part.re[mi][i];
                acc_im[mi][i] += part.im[mi][i];
            }
    }

    Recording rec;
    rec.sample_rate = fs;
    rec.channels.assign(m, {});
    std::vector<cplx> full(p);
    for (std::size_t mi = 0; mi < m; ++mi) {
        std::fill(full.begin(), full.end(), cplx(0.0, 0.0));
        for (std::size_t i = 0; i < nb; ++i) {
            full[bb.lo + i] = cplx(acc_re[mi][i], acc_im[mi][i]);
            full[p - (bb.lo + i)] = std::conj(full[bb.lo + i]);
        }
        fft::inverse(full);
        auto& ch = rec.channels[mi];
        ch.resize(n);
        for (std::size_t i = 0; i < n; ++i) ch[i] = full[i].real();
    }

    nlohmann::json meta;
    meta["band_hz"] = {band.low_hz(), band.high_hz()};
    meta["fs_hz"] = fs;
    meta["duration_s"] = duration_s;
    meta["seed"] = seed;
    meta["mics"] = m;
    meta["diffuse_oracle_directions"] = num_directions;
    rec.meta = meta.dump(2);
    return rec;
}

} // namespace dfield
