// mstatic: multistatic OFDM radar localization simulator.
//
// Subcommands:
//   map     emit per-pair and combined likelihood maps for one drawn scene
//   mc      Monte Carlo RMSE experiment (report + per-trial log)
//   sweep   subcarrier sweep (one report per Q)
//   oracle  exhaustive ML comparison on a small scene

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mstatic/config.hpp"
#include "mstatic/experiment.hpp"
#include "mstatic/io.hpp"

namespace fs = std::filesystem;
using namespace mstatic;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::vector<std::string> methods;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_trials) {
    cmd->add_option("--config", opts.config_path, "Scenario config file (JSON)");
    cmd->add_option("--seed", opts.seed, "Master seed override");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--methods", opts.methods, "Comma-separated method list")->delimiter(',');
    if (with_trials) {
        cmd->add_option("--trials", opts.trials, "Monte Carlo trial count override");
        cmd->add_option("--threads", opts.threads, "Worker threads (results are schedule-independent)");
    }
}

ScenarioConfig load_config(const CommonOptions& opts) {
    ScenarioConfig cfg =
        opts.config_path.empty() ? default_scenario() : parse_scenario(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.trials) cfg.trials = *opts.trials;
    if (!opts.methods.empty()) {
        cfg.methods.clear();
        for (const std::string& name : opts.methods) cfg.methods.push_back(method_from_name(name));
    }
    cfg.validate();
    return cfg;
}

std::string map_path(const std::string& dir, FusionMethod method, int pair_id) {
    const std::string tag = pair_id < 0 ? "combined" : "pair" + std::to_string(pair_id);
    return dir + "/map_" + method_name(method) + "_" + tag + ".csv";
}

int cmd_map(const CommonOptions& opts, bool db_scale) {
    const ScenarioConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    const FileMeta meta{cfg.digest(), cfg.seed};
    const MapScale scale = db_scale ? MapScale::db : MapScale::linear;
    const SceneData scene = simulate_scene(cfg, 0);

    nlohmann::json estimates = nlohmann::json::object();
    for (FusionMethod method : cfg.methods) {
        std::vector<Position2D> est;
        if (method == FusionMethod::soft) {
            std::vector<LikelihoodMap> maps;
            for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
                maps.push_back(pair_map_from_fields(scene.fields[p], cfg.grid, cfg.pairs[p],
                                                    FusionMethod::method_a, 1.0));
            }
            est = soft_fusion(maps, scene.truth, cfg.num_targets, cfg.peak_exclusion_radius_m);
            std::cout << "soft: parametric method, no likelihood map emitted\n";
        } else {
            std::vector<LikelihoodMap> maps;
            for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
                maps.push_back(pair_map_from_fields(scene.fields[p], cfg.grid, cfg.pairs[p],
                                                    method, scene.signal_power_weights[p]));
                export_map(maps.back(), map_path(opts.out_dir, method, cfg.pairs[p].pair_id),
                           meta, scale);
            }
            const LikelihoodMap combined = combine_maps(maps);
            export_map(combined, map_path(opts.out_dir, method, -1), meta, scale);
            est = select_peaks(combined, cfg.num_targets, cfg.peak_exclusion_radius_m);
            std::cout << method_name(method) << ": wrote " << cfg.pairs.size()
                      << " per-pair maps + combined\n";
        }
        nlohmann::json pos = nlohmann::json::array();
        for (const Position2D& e : est) pos.push_back(nlohmann::json::array({e.x, e.y}));
        estimates[method_name(method)] = pos;
    }

    nlohmann::json truth = nlohmann::json::array();
    for (const Position2D& t : scene.truth) truth.push_back(nlohmann::json::array({t.x, t.y}));
    const nlohmann::json scene_json{
        {"scenario_digest", meta.scenario_digest},
        {"seed", meta.seed},
        {"truth", truth},
        {"estimates", estimates},
        {"soft_fusion_association", "ground-truth"},
    };
    std::ofstream out(opts.out_dir + "/scene.json", std::ios::binary);
    out << scene_json.dump(2) << "\n";
    return 0;
}

int cmd_mc(const CommonOptions& opts) {
    const ScenarioConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    const FileMeta meta{cfg.digest(), cfg.seed};

    std::vector<TrialResult> log;
    const ExperimentReport report =
        run_experiment(cfg, cfg.trials, cfg.methods, opts.threads, &log);
    write_report(report, opts.out_dir + "/report.json");
    write_trial_log(log, opts.out_dir + "/trials.jsonl", meta);

    std::cout << "trials=" << report.trials << " seed=" << report.seed << "\n";
    for (const auto& [method, summary] : report.methods) {
        std::cout << "  " << method_name(method) << ": rmse=" << summary.rmse_m
                  << " m (ci95 +-" << summary.ci95_m << ")\n";
    }
    std::cout << "  mean diagonality=" << report.mean_diagonality << "\n";
    return 0;
}

int cmd_sweep(const CommonOptions& opts, const std::vector<int>& q_list) {
    const ScenarioConfig cfg = load_config(opts);
    fs::create_directories(opts.out_dir);
    const std::vector<ExperimentReport> reports =
        sweep_subcarriers(cfg, q_list, cfg.trials, opts.threads);
    write_sweep_reports(reports, FileMeta{cfg.digest(), cfg.seed}, opts.out_dir + "/sweep.json");
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::cout << "Q=" << q_list[i]
                  << " proposed rmse=" << reports[i].summary(FusionMethod::proposed).rmse_m
                  << " m, mean diagonality=" << reports[i].mean_diagonality << "\n";
    }
    return 0;
}

int cmd_oracle(const CommonOptions& opts, bool with_noise, std::optional<std::uint64_t> budget,
               std::optional<double> grid_step) {
    ScenarioConfig cfg = load_config(opts);
    if (grid_step) cfg.grid.step = *grid_step;
    cfg.validate();
    fs::create_directories(opts.out_dir);

    const SceneData scene = simulate_scene(cfg, 0, /*noiseless=*/!with_noise);
    const std::vector<Position2D> oracle_est =
        exact_ml_oracle(scene.covariances, cfg.pairs, cfg.grid, cfg.num_targets,
                        budget.value_or(cfg.oracle_budget));

    std::vector<LikelihoodMap> maps;
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        maps.push_back(pair_map_from_fields(scene.fields[p], cfg.grid, cfg.pairs[p],
                                            FusionMethod::proposed,
                                            scene.signal_power_weights[p]));
    }
    const std::vector<Position2D> proposed_est =
        select_peaks(combine_maps(maps), cfg.num_targets, cfg.peak_exclusion_radius_m);

    const std::vector<double> sq = associate_and_score(oracle_est, proposed_est);
    double worst_cells = 0.0;
    for (const double e : sq) worst_cells = std::max(worst_cells, std::sqrt(e) / cfg.grid.step);
    const std::string agreement =
        worst_cells == 0.0 ? "exact" : (worst_cells <= std::sqrt(2.0) + 1e-9 ? "within-one-cell"
                                                                             : "mismatch");

    nlohmann::json to_json = nlohmann::json::array();
    for (const Position2D& p : oracle_est) to_json.push_back(nlohmann::json::array({p.x, p.y}));
    nlohmann::json prop_json = nlohmann::json::array();
    for (const Position2D& p : proposed_est) prop_json.push_back(nlohmann::json::array({p.x, p.y}));
    const nlohmann::json j{
        {"scenario_digest", cfg.digest()},
        {"seed", cfg.seed},
        {"noiseless", !with_noise},
        {"oracle", to_json},
        {"proposed", prop_json},
        {"agreement", agreement},
        {"max_offset_cells", worst_cells},
    };
    std::ofstream out(opts.out_dir + "/oracle.json", std::ios::binary);
    out << j.dump(2) << "\n";

    std::cout << "agreement = " << agreement << " (max offset " << worst_cells
              << " cells)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multistatic OFDM radar localization simulator"};
    app.require_subcommand(1);

    CommonOptions map_opts, mc_opts, sweep_opts, oracle_opts;
    bool map_db = false;
    std::vector<int> q_list{64, 128, 256, 512};
    bool with_noise = false;
    std::optional<std::uint64_t> oracle_budget;
    std::optional<double> oracle_grid_step;

    CLI::App* map_cmd = app.add_subcommand("map", "likelihood maps for one drawn scene");
    add_common(map_cmd, map_opts, false);
    map_cmd->add_flag("--db", map_db, "Export maps normalized to the highest peak, in dB");

    CLI::App* mc_cmd = app.add_subcommand("mc", "Monte Carlo RMSE experiment");
    add_common(mc_cmd, mc_opts, true);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "subcarrier sweep");
    add_common(sweep_cmd, sweep_opts, true);
    sweep_cmd->add_option("--q-list", q_list, "Comma-separated subcarrier counts")->delimiter(',');

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "exact ML comparison on a small scene");
    add_common(oracle_cmd, oracle_opts, false);
    oracle_cmd->add_flag("--with-noise", with_noise, "Add estimation noise (default noiseless)");
    oracle_cmd->add_option("--budget", oracle_budget, "Hypothesis budget override");
    oracle_cmd->add_option("--grid-step", oracle_grid_step, "Coarsened grid step in meters");

    CLI11_PARSE(app, argc, argv);

    try {
        if (map_cmd->parsed()) return cmd_map(map_opts, map_db);
        if (mc_cmd->parsed()) return cmd_mc(mc_opts);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, q_list);
        if (oracle_cmd->parsed()) return cmd_oracle(oracle_opts, with_noise, oracle_budget,
                                                    oracle_grid_step);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
