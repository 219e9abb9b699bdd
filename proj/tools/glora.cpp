// Experiment runner for the UAV-LoRa MAPPO simulator.
//
//   glora run spec.json [--seed S]... [--override k.path=v]... [--out DIR]
//             [--episodes N] [--dump-trajectories]
//
// Output root precedence: --out flag, then GLORA_OUT_ROOT, then the spec.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glora/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"UAV-assisted LoRa network simulator and MAPPO trainer"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "execute an experiment spec");
    std::string spec_path;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> overrides;
    std::string out_dir;
    long episodes = -1;
    bool dump_trajectories = false;
    run->add_option("spec", spec_path, "experiment spec JSON")->required();
    run->add_option("--seed", seeds, "seed(s); replaces the spec's seed list");
    run->add_option("--override", overrides, "config override key.path=value");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--episodes", episodes, "training episodes per run");
    run->add_flag("--dump-trajectories", dump_trajectories,
                  "write per-step trajectory JSON for each run");

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(spec_path);
        if (!in) {
            std::cerr << "error: cannot read spec " << spec_path << "\n";
            return 2;
        }
        glora::json spec_json = glora::json::parse(in);

        // Precedence: CLI > file > defaults.
        if (spec_json.contains("config")) {
            for (const auto& ov : overrides) {
                glora::apply_override(spec_json["config"], ov);
            }
        } else if (!overrides.empty()) {
            glora::json cfg = glora::Config{};
            for (const auto& ov : overrides) glora::apply_override(cfg, ov);
            spec_json["config"] = cfg;
        }

        glora::ExperimentSpec spec = glora::load_spec(spec_json);
        if (!seeds.empty()) spec.seeds = seeds;
        if (episodes >= 0) {
            spec.base.ppo.episodes = static_cast<std::size_t>(episodes);
        }
        if (dump_trajectories) spec.dump_trajectories = true;
        if (!out_dir.empty()) {
            spec.out_dir = out_dir;
        } else if (const char* root = std::getenv("GLORA_OUT_ROOT")) {
            spec.out_dir = std::filesystem::path(root) / spec.out_dir;
        }
        return glora::run_experiment(spec);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
