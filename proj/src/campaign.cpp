#include "dfield/campaign.hpp"

#include <future>
#include <stdexcept>
#include <thread>

#include "dfield/rng.hpp"
#include "dfield/simulate.hpp"
#include "dfield/util.hpp"

namespace dfield {

double CampaignResult::sum_for(int speaker_count, const std::string& mode) const {
    for (const auto& r : rows)
        if (r.speaker_count == speaker_count && r.mode == mode) return r.sum_of_variances;
    throw std::invalid_argument("campaign: no row for requested cell");
}

const CampaignResult::Cell& CampaignResult::cell_for(int speaker_count,
                                                     const std::string& mode) const {
    for (const auto& c : cells)
        if (c.speaker_count == speaker_count && c.mode == mode) return c;
    throw std::invalid_argument("campaign: no cell for requested query");
}

CampaignResult run_variance_campaign(const CampaignConfig& cfg) {
    if (cfg.trials < 2) throw std::invalid_argument("campaign: need at least 2 trials");
    if (cfg.segments < 2) throw std::invalid_argument("campaign: need at least 2 segments");

    struct Task {
        int count = 0;
        bool proposed = false;
        int trial = 0;
    };
    std::vector<Task> tasks;
    for (int count : cfg.speaker_counts)
        for (int mode = 0; mode < 2; ++mode)
            for (int t = 0; t < cfg.trials; ++t) tasks.push_back({count, mode == 1, t});

    const double shell = cfg.layout.radius;
    const double extent = cfg.geometry.extent();

    std::vector<CorrelationCurve> curves(tasks.size());
    auto run_task = [&](std::size_t i) {
        const Task& tk = tasks[i];
        const std::uint64_t cell_seed =
            mix_seed(cfg.base_seed,
                     static_cast<std::uint64_t>(tk.count) * 1000003ULL + tk.trial);
        const std::uint64_t traj_seed = mix_seed(cell_seed, 0x7472616aULL);

        CaptureConfig cc;
        cc.band = cfg.band;
        cc.duration_s = cfg.duration_s;
        cc.sample_rate = cfg.sample_rate;
        cc.speaker_count = tk.count;
        cc.seed = cell_seed; // matched drives across the two modes
        cc.trajectory = sample_trajectory(shell, extent, tk.proposed ? cfg.segments : 1,
                                          cfg.duration_s, traj_seed);
        const Recording rec = render_capture(cfg.layout, cfg.geometry, cc);
        curves[i] = correlation_curve(rec, cfg.geometry);
    };

    int workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    std::vector<std::future<void>> futs;
    futs.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        futs.push_back(std::async(std::launch::async, [&, w]() {
            for (std::size_t i = static_cast<std::size_t>(w); i < tasks.size();
                 i += static_cast<std::size_t>(workers))
                run_task(i);
        }));
    }
    for (auto& f : futs) f.get();

    CampaignResult result;
    for (int count : cfg.speaker_counts) {
        for (int mode = 0; mode < 2; ++mode) {
            std::vector<CorrelationCurve> cell;
            for (std::size_t i = 0; i < tasks.size(); ++i)
                if (tasks[i].count == count && tasks[i].proposed == (mode == 1))
                    cell.push_back(curves[i]);
            const auto per_distance = variance_by_distance(cell, cfg.bin_tolerance);
            const std::string mode_name = mode == 1 ? "proposed" : "fixed";
            result.rows.push_back({count, mode_name, sum_of_variances(per_distance)});
            result.cells.push_back({count, mode_name, per_distance});
        }
    }
    return result;
}

std::string variance_table_csv(const CampaignResult& result, const std::string& provenance_line) {
    std::string out;
    if (!provenance_line.empty()) out += "# " + provenance_line + "\n";
    out += "speakers,fixed,proposed\n";
    std::vector<int> counts;
    for (const auto& r : result.rows)
        if (counts.empty() || counts.back() != r.speaker_count) counts.push_back(r.speaker_count);
    for (int c : counts) {
        out += std::to_string(c);
        out += ',';
        out += format_double(result.sum_for(c, "fixed"));
        out += ',';
        out += format_double(result.sum_for(c, "proposed"));
        out += '\n';
    }
    return out;
}

} // namespace dfield
