#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glora/config.hpp"
#include "glora/mappo.hpp"

namespace glora {

namespace fs = std::filesystem;

struct ExperimentSpec {
    Config base;
    std::vector<std::uint64_t> seeds{7, 41, 233, 490, 688};
    std::vector<std::size_t> ed_counts;  // empty = base config value only
    std::vector<std::size_t> gw_counts;  // empty = base config value only
    fs::path out_dir = "runs";
    bool dump_trajectories = false;
};

inline ExperimentSpec load_spec(const json& j) {
    ExperimentSpec spec;
    spec.base = j.value("config", json::object()).get<Config>();
    spec.seeds = j.value("seeds", spec.seeds);
    if (spec.seeds.empty()) {
        throw std::invalid_argument("experiment spec: seed list must be nonempty");
    }
    spec.ed_counts = j.value("ed_counts", spec.ed_counts);
    spec.gw_counts = j.value("gw_counts", spec.gw_counts);
    spec.out_dir = fs::path(j.value("out_dir", spec.out_dir.string()));
    spec.dump_trajectories = j.value("dump_trajectories", spec.dump_trajectories);
    return spec;
}

inline void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

struct RunSummary {
    std::size_t num_uavs = 0;
    std::size_t num_eds = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    double final_window_reward = 0.0;  // mean team reward over the last 10%
    double episode_ee_sys = 0.0;       // final-window mean of the episode EE sum
    double total_tx_power_w = 0.0;     // final-window mean
};

inline double final_window_mean(const TrainingReport& report,
                                double window_frac,
                                double EpisodeMetrics::* field) {
    const std::size_t n = report.episodes.size();
    const std::size_t w = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(window_frac * static_cast<double>(n))));
    double sum = 0.0;
    for (std::size_t i = n - w; i < n; ++i) sum += report.episodes[i].*field;
    return sum / static_cast<double>(w);
}

inline json run_manifest(const Config& config) {
    json j;
    j["config"] = config;
    j["seed"] = config.seed;
    j["format_version"] = 1;
    return j;
}

// Writes the per-step trajectory dump for a finished run directory.
inline void emit_trajectories(const fs::path& run_dir, const json& trajectories) {
    if (!trajectories.contains("steps")) {
        std::cerr << "warning: no trajectory dumps recorded for "
                  << run_dir.string() << "\n";
        write_file(run_dir / "trajectories.json", json{{"steps", json::array()}}.dump(2));
        return;
    }
    write_file(run_dir / "trajectories.json", trajectories.dump(2));
}

inline RunSummary run_single(const Config& config, const fs::path& run_dir,
                             bool dump_trajectories) {
    fs::create_directories(run_dir);
    RunSummary summary;
    summary.num_uavs = config.env.num_uavs;
    summary.num_eds = config.env.num_eds;
    summary.seed = config.seed;
    try {
        Trainer trainer(config);
        TrainingReport report = trainer.train(dump_trajectories);
        write_file(run_dir / "metrics.csv", report.csv());
        write_file(run_dir / "manifest.json", run_manifest(config).dump(2));
        write_file(run_dir / "checkpoint.json", trainer.checkpoint().dump());
        if (dump_trajectories) emit_trajectories(run_dir, report.trajectories);
        summary.ok = true;
        summary.final_window_reward =
            final_window_mean(report, 0.1, &EpisodeMetrics::team_reward);
        summary.episode_ee_sys =
            final_window_mean(report, 0.1, &EpisodeMetrics::ee_sys);
        summary.total_tx_power_w =
            final_window_mean(report, 0.1, &EpisodeMetrics::total_tx_power_w);
    } catch (const std::exception& ex) {
        std::cerr << "run failed (" << run_dir.string() << "): " << ex.what()
                  << "\n";
        write_file(run_dir / "error.txt", ex.what());
    }
    return summary;
}

// Sweep over (gw_count, ed_count, seed); one subdirectory per run, plus a
// top-level summary aggregating mean and std across seeds. A failed sweep
// point does not abort the rest.
inline int run_experiment(const ExperimentSpec& spec) {
    fs::create_directories(spec.out_dir);
    std::vector<std::size_t> gw_counts = spec.gw_counts;
    std::vector<std::size_t> ed_counts = spec.ed_counts;
    if (gw_counts.empty()) gw_counts.push_back(spec.base.env.num_uavs);
    if (ed_counts.empty()) ed_counts.push_back(spec.base.env.num_eds);

    std::vector<RunSummary> all;
    for (std::size_t gw : gw_counts) {
        for (std::size_t ed : ed_counts) {
            for (std::uint64_t seed : spec.seeds) {
                Config config = spec.base;
                config.env.num_uavs = gw;
                config.env.num_eds = ed;
                config.env.uav_start.clear();
                config.seed = seed;
                std::ostringstream name;
                name << "gw" << gw << "_ed" << ed << "_seed" << seed;
                all.push_back(run_single(config, spec.out_dir / name.str(),
                                         spec.dump_trajectories));
            }
        }
    }

    std::ostringstream out;
    out << "num_uavs,num_eds,seeds_ok,mean_final_reward,std_final_reward,"
           "mean_ee_sys,mean_total_tx_power\n";
    bool any_failed = false;
    for (std::size_t gw : gw_counts) {
        for (std::size_t ed : ed_counts) {
            std::vector<const RunSummary*> group;
            for (const auto& s : all) {
                if (s.num_uavs == gw && s.num_eds == ed && s.ok)
                    group.push_back(&s);
                if (s.num_uavs == gw && s.num_eds == ed && !s.ok)
                    any_failed = true;
            }
            double mean_r = 0.0, mean_ee = 0.0, mean_p = 0.0;
            for (const auto* s : group) {
                mean_r += s->final_window_reward;
                mean_ee += s->episode_ee_sys;
                mean_p += s->total_tx_power_w;
            }
            const double n = std::max<double>(1.0, group.size());
            mean_r /= n; mean_ee /= n; mean_p /= n;
            double var = 0.0;
            for (const auto* s : group) {
                var += (s->final_window_reward - mean_r) *
                       (s->final_window_reward - mean_r);
            }
            out << gw << ',' << ed << ',' << group.size() << ','
                << TrainingReport::format_double(mean_r) << ','
                << TrainingReport::format_double(std::sqrt(var / n)) << ','
                << TrainingReport::format_double(mean_ee) << ','
                << TrainingReport::format_double(mean_p) << "\n";
        }
    }
    write_file(spec.out_dir / "summary.csv", out.str());
    return any_failed ? 1 : 0;
}

}  // namespace glora
