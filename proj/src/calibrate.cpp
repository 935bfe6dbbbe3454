#include "dfield/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "dfield/fft.hpp"
#include "dfield/util.hpp"

namespace dfield {

namespace {

using cplx = std::complex<double>;

constexpr double kSilentPower = 1e-30;

} // namespace

std::vector<std::size_t> MagnitudeSpectra::in_band_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < freq_hz.size(); ++i)
        if (freq_hz[i] >= band.low_hz() && freq_hz[i] <= band.high_hz()) idx.push_back(i);
    return idx;
}

MagnitudeSpectra estimate_magnitude_response(const Recording& rec, const BandSpec& analysis_band,
                                             const WelchConfig& cfg) {
    rec.validate();
    if (rec.duration() < 10.0)
        throw std::invalid_argument("estimate_magnitude_response: recording shorter than 10 s");
    if (!fft::is_pow2(static_cast<std::size_t>(cfg.segment_length)) || cfg.segment_length < 64)
        throw std::invalid_argument("welch: segment length must be a power of two >= 64");
    if (!(cfg.overlap >= 0.0) || cfg.overlap >= 1.0)
        throw std::invalid_argument("welch: overlap must be in [0, 1)");
    if (analysis_band.high_hz() >= rec.sample_rate / 2.0)
        throw std::invalid_argument("welch: analysis band reaches Nyquist");

    const auto nseg = static_cast<std::size_t>(cfg.segment_length);
    const auto hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(nseg * (1.0 - cfg.overlap))));
    const std::size_t frames = rec.frames();
    if (frames < nseg) throw std::invalid_argument("welch: recording shorter than one segment");
    const std::size_t nwin = (frames - nseg) / hop + 1;

    std::vector<double> window(nseg);
    double wsum2 = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / (nseg - 1)));
        wsum2 += window[i] * window[i];
    }
    const double scale = 1.0 / (rec.sample_rate * wsum2); // PSD density normalization

    MagnitudeSpectra out;
    out.band = analysis_band;
    out.welch = cfg;
    out.averages = static_cast<int>(nwin);
    out.freq_hz.resize(nseg / 2 + 1);
    for (std::size_t k = 0; k <= nseg / 2; ++k)
        out.freq_hz[k] = k * rec.sample_rate / static_cast<double>(nseg);

    std::vector<cplx> buf(nseg);
    out.magnitude_db.assign(rec.channel_count(), std::vector<double>(nseg / 2 + 1, 0.0));
    for (std::size_t ch = 0; ch < rec.channel_count(); ++ch) {
        const auto& x = rec.channels[ch];
        double power = 0.0;
        for (double v : x) power += v * v;
        if (power / static_cast<double>(frames) < kSilentPower)
            throw std::invalid_argument("estimate_magnitude_response: silent channel");

        std::vector<double> psd(nseg / 2 + 1, 0.0);
        for (std::size_t w = 0; w < nwin; ++w) {
            const std::size_t start = w * hop;
            for (std::size_t i = 0; i < nseg; ++i)
                buf[i] = cplx(x[start + i] * window[i], 0.0);
            fft::forward(buf);
            for (std::size_t k = 0; k <= nseg / 2; ++k) {
                const double mag2 = std::norm(buf[k]);
                psd[k] += mag2 * ((k == 0 || k == nseg / 2) ? 1.0 : 2.0);
            }
        }
        auto& db = out.magnitude_db[ch];
        for (std::size_t k = 0; k <= nseg / 2; ++k) {
            const double p = psd[k] * scale / static_cast<double>(nwin);
            db[k] = 10.0 * std::log10(std::max(p, 1e-300));
        }
    }
    return out;
}

CalibrationProfile relative_offsets(const MagnitudeSpectra& spectra) {
    const std::size_t nch = spectra.channel_count();
    if (nch < 2) throw std::invalid_argument("relative_offsets: need at least 2 channels");
    const std::size_t nbin = spectra.freq_hz.size();

    CalibrationProfile prof;
    prof.freq_hz = spectra.freq_hz;
    prof.band = spectra.band;
    prof.sample_rate = 2.0 * spectra.freq_hz.back(); // grid ends at Nyquist
    prof.offset_db.assign(nch, std::vector<double>(nbin, 0.0));
    for (std::size_t k = 0; k < nbin; ++k) {
        double mean = 0.0;
        for (std::size_t ch = 0; ch < nch; ++ch) mean += spectra.magnitude_db[ch][k];
        mean /= static_cast<double>(nch);
        for (std::size_t ch = 0; ch < nch; ++ch)
            prof.offset_db[ch][k] = spectra.magnitude_db[ch][k] - mean;
    }
    if (spectra.band.low_hz() <= 1000.0 && 1000.0 <= spectra.band.high_hz())
        prof.trim_stat_1khz_db = trim_drift_at(prof, 1000.0).spread_db;
    else
        prof.trim_stat_1khz_db = std::numeric_limits<double>::quiet_NaN();
    return prof;
}

namespace {

double interp_at(const std::vector<double>& freq, const std::vector<double>& val, double f0) {
    const auto it = std::lower_bound(freq.begin(), freq.end(), f0);
    if (it == freq.begin()) return val.front();
    if (it == freq.end()) return val.back();
    const std::size_t hi = static_cast<std::size_t>(it - freq.begin());
    const std::size_t lo = hi - 1;
    const double t = (f0 - freq[lo]) / (freq[hi] - freq[lo]);
    return val[lo] + t * (val[hi] - val[lo]);
}

TrimDrift trim_from_offsets(const std::vector<double>& freq,
                            const std::vector<std::vector<double>>& offsets, double f0,
                            const BandSpec& band) {
    if (f0 < band.low_hz() || f0 > band.high_hz())
        throw std::invalid_argument("trim_drift_at: frequency outside the analysis band");
    TrimDrift out;
    out.per_channel_db.reserve(offsets.size());
    for (const auto& ch : offsets) out.per_channel_db.push_back(interp_at(freq, ch, f0));
    const auto [mn, mx] =
        std::minmax_element(out.per_channel_db.begin(), out.per_channel_db.end());
    out.spread_db = *mx - *mn;
    return out;
}

} // namespace

TrimDrift trim_drift_at(const MagnitudeSpectra& spectra, double f0_hz) {
    const CalibrationProfile prof = relative_offsets(spectra);
    return trim_from_offsets(prof.freq_hz, prof.offset_db, f0_hz, spectra.band);
}

TrimDrift trim_drift_at(const CalibrationProfile& profile, double f0_hz) {
    return trim_from_offsets(profile.freq_hz, profile.offset_db, f0_hz, profile.band);
}

std::vector<double> fractional_octave_smooth(const std::vector<double>& freq_hz,
                                             const std::vector<double>& values_db,
                                             double octaves, const BandSpec& band) {
    if (freq_hz.size() != values_db.size())
        throw std::invalid_argument("fractional_octave_smooth: size mismatch");
    const double half = 0.5 * octaves;
    const std::size_t n = freq_hz.size();

    std::vector<double> prefix(n + 1, 0.0); // over finite values only
    std::vector<std::size_t> valid(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const bool ok = std::isfinite(values_db[i]);
        prefix[i + 1] = prefix[i] + (ok ? values_db[i] : 0.0);
        valid[i + 1] = valid[i] + (ok ? 1 : 0);
    }
    auto first_at_least = [&](double f) {
        return static_cast<std::size_t>(
            std::lower_bound(freq_hz.begin(), freq_hz.end(), f) - freq_hz.begin());
    };

    std::vector<double> out(values_db);
    for (std::size_t i = 0; i < n; ++i) {
        const double f0 = freq_hz[i];
        if (f0 <= 0.0) continue;
        const double lo = std::max(f0 * std::pow(2.0, -half), band.low_hz());
        const double hi = std::min(f0 * std::pow(2.0, half), band.high_hz());
        if (hi < lo) continue; // window entirely outside the band: keep raw
        const std::size_t a = first_at_least(lo);
        const std::size_t b = first_at_least(std::nextafter(hi, 1e300));
        if (b <= a) continue;
        const std::size_t count = valid[b] - valid[a];
        if (count > 0) out[i] = (prefix[b] - prefix[a]) / static_cast<double>(count);
    }
    return out;
}

CalibrationProfile design_calibration_filters(const CalibrationProfile& offsets,
                                              const FilterDesign& design) {
    if (offsets.channel_count() < 2)
        throw std::invalid_argument("design_calibration_filters: need offsets");
    if (design.filter_length < 17 || design.filter_length % 2 == 0)
        throw std::invalid_argument("design_calibration_filters: filter length must be odd >= 17");
    if (!(offsets.sample_rate > 0.0))
        throw std::invalid_argument("design_calibration_filters: profile lacks a sample rate");
    const double fs = offsets.sample_rate;
    const double f_lo = offsets.band.low_hz();
    const double f_hi = offsets.band.high_hz();

    for (const auto& ch : offsets.offset_db) {
        std::size_t k = 0;
        for (; k < offsets.freq_hz.size(); ++k) {
            const double f = offsets.freq_hz[k];
            if (f >= f_lo && f <= f_hi && !std::isfinite(ch[k]))
                throw std::invalid_argument("design_calibration_filters: non-finite in-band offset");
        }
    }

    const int taps = design.filter_length;
    const int n0 = (taps - 1) / 2;
    const std::size_t nd = fft::next_pow2(static_cast<std::size_t>(taps) * 8); // design grid
    // transition bands: a third of an octave beyond each edge, cosine blend
    const double t_lo = f_lo * std::pow(2.0, -1.0 / 3.0);
    const double t_hi = std::min(f_hi * std::pow(2.0, 1.0 / 3.0), 0.999 * fs / 2.0);

    CalibrationProfile out = offsets;
    out.filter_taps.assign(offsets.channel_count(), {});

    std::vector<cplx> buf(nd);
    for (std::size_t ch = 0; ch < offsets.channel_count(); ++ch) {
        const std::vector<double> smooth = fractional_octave_smooth(
            offsets.freq_hz, offsets.offset_db[ch], design.smoothing_octaves, offsets.band);
        auto target_db_at = [&](double f) -> double {
            if (f >= f_lo && f <= f_hi) return -interp_at(offsets.freq_hz, smooth, f);
            if (f > t_lo && f < f_lo) {
                const double t = (f - t_lo) / (f_lo - t_lo);
                const double blend = 0.5 - 0.5 * std::cos(M_PI * t);
                return blend * -interp_at(offsets.freq_hz, smooth, f_lo);
            }
            if (f > f_hi && f < t_hi) {
                const double t = (f - f_hi) / (t_hi - f_hi);
                const double blend = 0.5 + 0.5 * std::cos(M_PI * t);
                return blend * -interp_at(offsets.freq_hz, smooth, f_hi);
            }
            return 0.0;
        };

        // frequency sampling with linear phase
        std::fill(buf.begin(), buf.end(), cplx(0.0, 0.0));
        for (std::size_t k = 0; k <= nd / 2; ++k) {
            const double f = k * fs / static_cast<double>(nd);
            const double a = std::pow(10.0, target_db_at(f) / 20.0);
            const double phase = -2.0 * M_PI * static_cast<double>(k) * n0 / static_cast<double>(nd);
            buf[k] = cplx(a * std::cos(phase), a * std::sin(phase));
            if (k != 0 && k != nd / 2) buf[nd - k] = std::conj(buf[k]);
        }
        fft::inverse(buf);
        std::vector<double> taps_v(taps);
        for (int i = 0; i < taps; ++i) taps_v[i] = buf[i].real();

        // verify the achieved response against the smoothed target
        const std::size_t nv = nd * 2;
        std::vector<cplx> vb(nv, cplx(0.0, 0.0));
        for (int i = 0; i < taps; ++i) vb[i] = cplx(taps_v[i], 0.0);
        fft::forward(vb);
        for (std::size_t k = 0; k <= nv / 2; ++k) {
            const double f = k * fs / static_cast<double>(nv);
            const double got_db = 20.0 * std::log10(std::max(std::abs(vb[k]), 1e-300));
            if (f >= f_lo && f <= f_hi) {
                if (std::abs(got_db - target_db_at(f)) > design.in_band_tolerance_db)
                    throw std::runtime_error(
                        "design_calibration_filters: in-band response misses target at this "
                        "filter length");
            } else if (f <= t_lo || f >= t_hi) {
                if (std::abs(got_db) > design.out_band_tolerance_db)
                    throw std::runtime_error(
                        "design_calibration_filters: out-of-band response exceeds tolerance");
            }
        }
        out.filter_taps[ch] = std::move(taps_v);
    }
    return out;
}

Recording apply_calibration(const Recording& rec, const CalibrationProfile& profile) {
    rec.validate();
    if (profile.filter_taps.empty() ||
        profile.filter_taps.size() != rec.channel_count())
        throw std::invalid_argument("apply_calibration: profile/recording channel mismatch");

    const std::size_t n = rec.frames();
    Recording out;
    out.sample_rate = rec.sample_rate;
    out.meta = rec.meta;
    out.channels.assign(rec.channel_count(), {});

    for (std::size_t ch = 0; ch < rec.channel_count(); ++ch) {
        const auto& taps = profile.filter_taps[ch];
        if (taps.empty()) throw std::invalid_argument("apply_calibration: profile lacks filters");
        const std::size_t p = fft::next_pow2(n + taps.size());
        std::vector<cplx> xb(p, cplx(0.0, 0.0));
        std::vector<cplx> hb(p, cplx(0.0, 0.0));
        for (std::size_t i = 0; i < n; ++i) xb[i] = cplx(rec.channels[ch][i], 0.0);
        for (std::size_t i = 0; i < taps.size(); ++i) hb[i] = cplx(taps[i], 0.0);
        fft::forward(xb);
        fft::forward(hb);
        for (std::size_t k = 0; k < p; ++k) xb[k] *= hb[k];
        fft::inverse(xb);
        auto& y = out.channels[ch];
        y.resize(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = xb[i].real();
    }
    return out;
}

std::string profile_json(const CalibrationProfile& profile) {
    nlohmann::json j;
    j["freq_hz"] = profile.freq_hz;
    j["band_hz"] = {profile.band.low_hz(), profile.band.high_hz()};
    j["sample_rate_hz"] = profile.sample_rate;
    j["trim_stat_1khz_db"] = profile.trim_stat_1khz_db;
    j["channels"] = nlohmann::json::array();
    for (std::size_t ch = 0; ch < profile.channel_count(); ++ch) {
        nlohmann::json c;
        c["offset_db"] = profile.offset_db[ch];
        c["filter_taps"] =
            ch < profile.filter_taps.size() ? profile.filter_taps[ch] : std::vector<double>{};
        j["channels"].push_back(std::move(c));
    }
    return j.dump(2);
}

CalibrationProfile profile_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    CalibrationProfile p;
    p.freq_hz = j.at("freq_hz").get<std::vector<double>>();
    p.band = BandSpec::from_hz(j.at("band_hz")[0].get<double>(), j.at("band_hz")[1].get<double>());
    p.sample_rate = j.value("sample_rate_hz", 0.0);
    p.trim_stat_1khz_db = std::numeric_limits<double>::quiet_NaN();
    if (j.contains("trim_stat_1khz_db") && j["trim_stat_1khz_db"].is_number())
        p.trim_stat_1khz_db = j["trim_stat_1khz_db"].get<double>();
    for (const auto& c : j.at("channels")) {
        p.offset_db.push_back(c.at("offset_db").get<std::vector<double>>());
        p.filter_taps.push_back(c.value("filter_taps", std::vector<double>{}));
    }
    return p;
}

std::string offsets_csv(const CalibrationProfile& profile, const std::string& provenance_line) {
    std::string out;
    if (!provenance_line.empty()) out += "# " + provenance_line + "\n";
    out += "freq_hz";
    for (std::size_t ch = 0; ch < profile.channel_count(); ++ch)
        out += ",offset_db_ch" + std::to_string(ch);
    out += '\n';
    for (std::size_t k = 0; k < profile.freq_hz.size(); ++k) {
        out += format_double(profile.freq_hz[k]);
        for (std::size_t ch = 0; ch < profile.channel_count(); ++ch) {
            out += ',';
            out += format_double(profile.offset_db[ch][k]);
        }
        out += '\n';
    }
    return out;
}

} // namespace dfield
