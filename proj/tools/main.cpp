#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"

namespace {

using dfield::RunConfig;

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string band;
    std::string speakers;
    std::string mode;
    double duration = -1.0;
    double fs = -1.0;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "run configuration file (key = value lines)");
    cmd->add_option("--out", f.out_dir, "output directory (default $DFIELD_OUT or .)");
    cmd->add_option("--band", f.band, "analysis/drive band LO,HI in Hz");
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--duration", f.duration, "capture duration, seconds");
    cmd->add_option("--fs", f.fs, "sample rate, Hz");
    cmd->add_option("--speakers", f.speakers, "speaker count, or comma list for campaigns");
    cmd->add_option("--mode", f.mode, "fixed or proposed");
}

/// Flags override file values.
RunConfig build_config(const CommonFlags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) cfg = RunConfig::from_file(f.config_path);
    if (!f.band.empty()) {
        const auto comma = f.band.find(',');
        if (comma == std::string::npos)
            throw dfield::cli::UsageError("--band expects LO,HI in Hz");
        cfg.set("band.low_hz", std::stod(f.band.substr(0, comma)));
        cfg.set("band.high_hz", std::stod(f.band.substr(comma + 1)));
    }
    if (f.seed >= 0) cfg.set("seed", static_cast<std::uint64_t>(f.seed));
    if (f.duration > 0) cfg.set("duration_s", f.duration);
    if (f.fs > 0) cfg.set("fs_hz", f.fs);
    if (!f.mode.empty()) cfg.set("mode", f.mode);
    if (!f.speakers.empty()) {
        std::vector<int> counts;
        std::string rest = f.speakers;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            counts.push_back(std::stoi(rest.substr(0, comma)));
            if (comma == std::string::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (counts.size() == 1) {
            cfg.set("speaker_count", counts[0]);
        } else {
            cfg.set("campaign.speakers", counts);
        }
    }
    return cfg;
}

std::string resolve_out(const CommonFlags& f) {
    if (!f.out_dir.empty()) return f.out_dir;
    if (const char* env = std::getenv("DFIELD_OUT"); env && *env) return env;
    return ".";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dfield: diffuse-field correlation, simulation and array calibration"};
    app.set_version_flag("--version", std::string("dfield ") + dfield::cli::kVersion);
    app.require_subcommand(1);

    CommonFlags tf, sf, af, cf;
    double dmax = -1.0;
    int points = -1;
    std::vector<std::string> recordings;
    std::string cal_recording;
    bool apply = false;
    bool campaign = false;

    CLI::App* theory = app.add_subcommand("theory", "theoretical correlation-vs-distance curves");
    add_common(theory, tf);
    theory->add_option("--dmax", dmax, "largest distance, meters (default 0.32)");
    theory->add_option("--points", points, "number of rows (default 200)");

    CLI::App* simulate = app.add_subcommand("simulate", "render a synthetic capture");
    add_common(simulate, sf);

    CLI::App* analyze = app.add_subcommand("analyze", "correlation curves and variance tables");
    add_common(analyze, af);
    analyze->add_option("recordings", recordings, "capture WAV files");
    analyze->add_flag("--campaign", campaign, "run the fixed-vs-proposed simulation campaign");

    CLI::App* calibrate = app.add_subcommand("calibrate", "diffuse-field magnitude calibration");
    add_common(calibrate, cf);
    calibrate->add_option("recording", cal_recording, "multichannel capture WAV")->required();
    calibrate->add_flag("--apply", apply, "also write the filtered recording");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (theory->parsed()) {
            RunConfig cfg = build_config(tf);
            if (dmax > 0) cfg.set("dmax_m", dmax);
            if (points > 0) cfg.set("points", points);
            dfield::cli::cmd_theory(cfg, resolve_out(tf));
        } else if (simulate->parsed()) {
            dfield::cli::cmd_simulate(build_config(sf), resolve_out(sf));
        } else if (analyze->parsed()) {
            RunConfig cfg = build_config(af);
            if (campaign && !cfg.has("campaign.trials")) cfg.set("campaign.trials", 20);
            std::vector<std::filesystem::path> paths(recordings.begin(), recordings.end());
            dfield::cli::cmd_analyze(cfg, paths, resolve_out(af));
        } else if (calibrate->parsed()) {
            RunConfig cfg = build_config(cf);
            if (apply) cfg.set("apply", "true");
            dfield::cli::cmd_calibrate(cfg, cal_recording, resolve_out(cf));
        }
    } catch (const dfield::cli::UsageError& e) {
        std::fprintf(stderr, "dfield: %s\n", e.what());
        return 2;
    } catch (const dfield::ConfigError& e) {
        std::fprintf(stderr, "dfield: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "dfield: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dfield: numerical failure: %s\n", e.what());
        return 3;
    }
    return 0;
}
