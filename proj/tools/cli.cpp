#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "dfield/calibrate.hpp"
#include "dfield/campaign.hpp"
#include "dfield/estimate.hpp"
#include "dfield/field.hpp"
#include "dfield/rng.hpp"
#include "dfield/simulate.hpp"
#include "dfield/util.hpp"
#include "dfield/wav.hpp"

namespace dfield::cli {

namespace {

BandSpec band_from(const RunConfig& cfg) {
    return BandSpec::from_hz(cfg.get_double("band.low_hz", 500.0),
                             cfg.get_double("band.high_hz", 4500.0));
}

PhysicalConstants constants_from(const RunConfig& cfg) {
    return {cfg.get_double("c_mps", 343.0)};
}

CaptureConfig capture_from(const RunConfig& cfg, const LoudspeakerLayout& layout,
                           const ArrayGeometry& geom) {
    CaptureConfig cc;
    cc.band = band_from(cfg);
    cc.duration_s = cfg.get_double("duration_s", 30.0);
    cc.sample_rate = cfg.get_double("fs_hz", 16000.0);
    cc.speaker_count = cfg.get_int("speaker_count", 2);
    cc.seed = cfg.get_u64("seed", 1);
    cc.noise = cfg.get_string("noise", "white") == "pink" ? NoiseColor::pink : NoiseColor::white;

    const std::string mode = cfg.get_string("mode", "fixed");
    const std::uint64_t traj_seed = cfg.get_u64("trajectory.seed", mix_seed(cc.seed, 0x7472616aULL));
    if (mode == "proposed") {
        const int segments = cfg.get_int("trajectory.segments", 120);
        cc.trajectory = sample_trajectory(layout.radius, geom.extent(), segments, cc.duration_s,
                                          traj_seed);
    } else if (mode == "fixed") {
        const std::string placement = cfg.get_string("placement", "center");
        if (placement == "random") {
            cc.trajectory =
                sample_trajectory(layout.radius, geom.extent(), 1, cc.duration_s, traj_seed);
        } else if (placement != "center") {
            throw UsageError("placement must be \"center\" or \"random\"");
        }
    } else {
        throw UsageError("mode must be \"fixed\" or \"proposed\"");
    }
    return cc;
}

} // namespace

std::string provenance_line(const std::string& command, const RunConfig& cfg) {
    return "dfield " + command + " version=" + kVersion + " config=" + to_hex(cfg.digest()) +
           " seed=" + std::to_string(cfg.get_u64("seed", 1));
}

void cmd_theory(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const BandSpec band = band_from(cfg);
    const PhysicalConstants k = constants_from(cfg);
    const double d_max = cfg.get_double("dmax_m", 0.32);
    const int points = cfg.get_int("points", 200);
    if (!(d_max > 0.0)) throw UsageError("dmax_m must be > 0");
    if (points < 2) throw UsageError("points must be >= 2");

    std::string csv = "# " + provenance_line("theory", cfg) + "\n";
    csv += "distance_m,rho_closed,rho_quadrature,rho_narrowband,rho_second_order\n";
    for (int i = 0; i < points; ++i) {
        const double d = d_max * i / (points - 1);
        const double closed = rho_wideband_closed(d, band, k);
        const double quad = rho_wideband_quadrature(d, band, k, 1e-10);
        const double nb = rho_narrowband(d, band.omega_center(), k);
        // the two-term form is singular at d = 0; the closed form is its limit value
        const double second = d > 0.0 ? rho_second_order(d, band, k) : closed;
        csv += format_double(d);
        csv += ',';
        csv += format_double(closed);
        csv += ',';
        csv += format_double(quad);
        csv += ',';
        csv += format_double(nb);
        csv += ',';
        csv += format_double(second);
        csv += '\n';
    }
    write_file_atomic(out_dir / "theory.csv", csv);
}

void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const ArrayGeometry geom = geometry_from_config(cfg);
    const LoudspeakerLayout layout = layout_from_config(cfg);
    const CaptureConfig cc = capture_from(cfg, layout, geom);

    Recording rec = render_capture(layout, geom, cc);

    // extend the render meta with run provenance
    nlohmann::json meta = nlohmann::json::parse(rec.meta);
    meta["config_digest"] = to_hex(cfg.digest());
    meta["mode"] = cfg.get_string("mode", "fixed");
    meta["version"] = kVersion;
    rec.meta = meta.dump(2);

    write_wav(out_dir / "capture.wav", rec);
}

void cmd_analyze(const RunConfig& cfg, const std::vector<std::filesystem::path>& recordings,
                 const std::filesystem::path& out_dir) {
    const bool campaign_requested = cfg.has("campaign.trials") || cfg.has("campaign.speakers");
    if (recordings.empty() && !campaign_requested)
        throw UsageError("analyze: no recordings given and no campaign configured");

    const std::string prov = provenance_line("analyze", cfg);

    if (!recordings.empty()) {
        const ArrayGeometry geom = geometry_from_config(cfg);
        struct Group {
            int speakers = 0;
            bool perturbed = false;
            std::vector<CorrelationCurve> curves;
        };
        std::vector<Group> groups;
        for (const auto& path : recordings) {
            if (!std::filesystem::exists(path))
                throw UsageError("analyze: no such recording: " + path.string());
            const Recording rec = read_wav(path);
            const CorrelationCurve curve = correlation_curve(rec, geom);
            write_file_atomic(out_dir / ("curve_" + path.stem().string() + ".csv"),
                              curve_csv(curve, prov));
            int speakers = 0;
            bool perturbed = false;
            if (!rec.meta.empty()) {
                const auto meta = nlohmann::json::parse(rec.meta, nullptr, false);
                if (!meta.is_discarded()) {
                    speakers = meta.value("speakers", 0);
                    perturbed = meta.value("perturbed", false);
                }
            }
            auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
                return g.speakers == speakers && g.perturbed == perturbed;
            });
            if (it == groups.end()) {
                groups.push_back({speakers, perturbed, {}});
                it = groups.end() - 1;
            }
            it->curves.push_back(curve);
        }
        // variance table over sidecar-identified cells with repeated trials
        std::string table = "# " + prov + "\nspeakers,mode,sum_of_variances\n";
        bool any = false;
        for (const auto& g : groups) {
            if (g.curves.size() < 2) continue;
            const double sov = sum_of_variances(variance_by_distance(g.curves));
            table += std::to_string(g.speakers);
            table += ',';
            table += g.perturbed ? "proposed" : "fixed";
            table += ',';
            table += format_double(sov);
            table += '\n';
            any = true;
        }
        if (any) write_file_atomic(out_dir / "variance_table.csv", table);
    }

    if (campaign_requested) {
        CampaignConfig cc;
        cc.layout = layout_from_config(cfg);
        cc.geometry = geometry_from_config(cfg);
        cc.band = band_from(cfg);
        cc.sample_rate = cfg.get_double("fs_hz", 16000.0);
        cc.duration_s = cfg.get_double("duration_s", 30.0);
        cc.trials = cfg.get_int("campaign.trials", 20);
        cc.segments = cfg.get_int("trajectory.segments", 120);
        cc.base_seed = cfg.get_u64("seed", 1);
        if (cfg.has("campaign.speakers")) {
            cc.speaker_counts.clear();
            for (const auto& v : cfg.get("campaign.speakers"))
                cc.speaker_counts.push_back(v.get<int>());
        }
        const CampaignResult result = run_variance_campaign(cc);
        write_file_atomic(out_dir / "variance_table.csv", variance_table_csv(result, prov));
    }
}

void cmd_calibrate(const RunConfig& cfg, const std::filesystem::path& recording,
                   const std::filesystem::path& out_dir) {
    if (!std::filesystem::exists(recording))
        throw UsageError("calibrate: no such recording: " + recording.string());
    const Recording rec = read_wav(recording);

    const BandSpec band = band_from(cfg);
    WelchConfig welch;
    welch.segment_length = cfg.get_int("welch.segment", 4096);
    welch.overlap = cfg.get_double("welch.overlap", 0.5);

    const MagnitudeSpectra spectra = estimate_magnitude_response(rec, band, welch);
    CalibrationProfile offsets = relative_offsets(spectra);

    FilterDesign design;
    design.smoothing_octaves = cfg.get_double("smoothing_octaves", 1.0 / 6.0);
    design.filter_length = cfg.get_int("filter_length", 1025);
    const CalibrationProfile profile = design_calibration_filters(offsets, design);

    const std::string prov = provenance_line("calibrate", cfg);
    write_file_atomic(out_dir / "profile.json", profile_json(profile));
    write_file_atomic(out_dir / "offsets.csv", offsets_csv(profile, prov));

    std::printf("trim drift at 1 kHz: %.3f dB across %zu channels\n", profile.trim_stat_1khz_db,
                profile.channel_count());

    if (cfg.get_string("apply", "false") == "true") {
        const Recording calibrated = apply_calibration(rec, profile);
        write_wav(out_dir / "calibrated.wav", calibrated);
    }
}

} // namespace dfield::cli
