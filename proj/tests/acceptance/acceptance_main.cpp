// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Trial counts default to 2000 (MSTATIC_ACCEPT_TRIALS overrides;
// MSTATIC_ACCEPT_THREADS sets the worker count, results are identical for
// any value).

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "mstatic/channel.hpp"
#include "mstatic/config.hpp"
#include "mstatic/experiment.hpp"
#include "mstatic/io.hpp"
#include "mstatic/rng.hpp"
#include "mstatic/subspace.hpp"

using namespace mstatic;
namespace fs = std::filesystem;

namespace {

int g_trials = 2000;
int g_threads = 1;
int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& details) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name;
    if (!details.empty()) std::cout << " — " << details;
    std::cout << "\n" << std::flush;
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::fixed << v;
    return os.str();
}

double rmse(const ExperimentReport& r, FusionMethod m) { return r.summary(m).rmse_m; }
double ci(const ExperimentReport& r, FusionMethod m) { return r.summary(m).ci95_m; }

const std::vector<FusionMethod> kAllMethods{FusionMethod::proposed, FusionMethod::method_a,
                                            FusionMethod::method_b, FusionMethod::fft2d,
                                            FusionMethod::soft};

// ---------------------------------------------------------------- criterion 1
ExperimentReport criterion1() {
    const ScenarioConfig cfg = default_scenario();
    const ExperimentReport rep = run_experiment(cfg, g_trials, kAllMethods, g_threads);

    const double p = rmse(rep, FusionMethod::proposed);
    const double a = rmse(rep, FusionMethod::method_a);
    const double s = rmse(rep, FusionMethod::soft);
    const double b = rmse(rep, FusionMethod::method_b);
    const double f = rmse(rep, FusionMethod::fft2d);

    const bool ordering = p <= a && a < s && s < b && b < f;
    const bool ci_b = p + ci(rep, FusionMethod::proposed) < b - ci(rep, FusionMethod::method_b);
    const bool ci_f = p + ci(rep, FusionMethod::proposed) < f - ci(rep, FusionMethod::fft2d);

    std::ostringstream os;
    os << "rmse[m] proposed=" << fmt(p) << " A=" << fmt(a) << " soft=" << fmt(s)
       << " B=" << fmt(b) << " fft=" << fmt(f) << " (absolute values are scenario-specific;"
       << " the ordering is the reproducible claim)";
    report(1, "RMSE ordering proposed <= A < soft < B < fft2d with CI separation",
           ordering && ci_b && ci_f, os.str());
    return rep;
}

// ---------------------------------------------------------------- criterion 2
ExperimentReport criterion2(const ExperimentReport& base) {
    ScenarioConfig cfg = default_scenario();
    cfg.pairs[0].tx.elements = 8;  // M1 = 8 = 2 M2
    const ExperimentReport rep = run_experiment(cfg, g_trials, kAllMethods, g_threads);

    const double before = rmse(base, FusionMethod::proposed);
    const double after = rmse(rep, FusionMethod::proposed);
    const bool pass = after <= 0.95 * before;
    report(2, "doubling M1 cuts proposed RMSE by at least 5%", pass,
           "proposed " + fmt(before) + " -> " + fmt(after) + " m (" +
               fmt((1.0 - after / before) * 100.0) + "% reduction)");
    return rep;
}

// ---------------------------------------------------------------- criterion 3
void criterion3(const ExperimentReport& base, const ExperimentReport& more_antennas) {
    ScenarioConfig cfg = default_scenario();
    cfg.pairs[0].noise_variance *= 0.5;  // sigma1^2 = 0.5 sigma2^2
    const ExperimentReport rep = run_experiment(cfg, g_trials, kAllMethods, g_threads);

    const double gain_antennas =
        rmse(base, FusionMethod::proposed) - rmse(more_antennas, FusionMethod::proposed);
    const double gain_noise =
        rmse(base, FusionMethod::proposed) - rmse(rep, FusionMethod::proposed);
    report(3, "doubling antennas beats halving the noise variance",
           gain_antennas > gain_noise,
           "reduction " + fmt(gain_antennas) + " m vs " + fmt(gain_noise) + " m");
}

// ---------------------------------------------------------------- criterion 4
void criterion4() {
    const ScenarioConfig cfg = default_scenario();
    const std::vector<int> q_list{64, 128, 256, 512};
    const std::vector<ExperimentReport> reports =
        sweep_subcarriers(cfg, q_list, g_trials, g_threads);

    bool rmse_trend = true;
    bool zeta_trend = true;
    bool weighted_wins = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const double p = rmse(reports[i], FusionMethod::proposed);
        const double a = rmse(reports[i], FusionMethod::method_a);
        os << "Q=" << q_list[i] << " rmse=" << fmt(p) << " (A " << fmt(a) << ")"
           << " zeta=" << fmt(reports[i].mean_diagonality) << "; ";
        // same 95%-confidence reading as the two trend clauses
        if (p > a + ci(reports[i], FusionMethod::proposed) +
                    ci(reports[i], FusionMethod::method_a)) {
            weighted_wins = false;
        }
        if (i > 0) {
            const double slack = ci(reports[i - 1], FusionMethod::proposed) +
                                 ci(reports[i], FusionMethod::proposed);
            if (p > rmse(reports[i - 1], FusionMethod::proposed) + slack) rmse_trend = false;
            const double zslack =
                reports[i - 1].diagonality_ci95 + reports[i].diagonality_ci95;
            if (reports[i].mean_diagonality < reports[i - 1].mean_diagonality - zslack) {
                zeta_trend = false;
            }
        }
    }
    report(4, "Q sweep: RMSE nonincreasing, diagonality nondecreasing, proposed <= A",
           rmse_trend && zeta_trend && weighted_wins, os.str());
}

// ---------------------------------------------------------------- criterion 5
struct OracleScene {
    std::vector<CovarianceSet> covs;
    std::vector<SubspaceDecomposition> decs;
    std::vector<AngleEstimate> ests;
    std::vector<double> sbar;
};

OracleScene noiseless_scene(const ScenarioConfig& cfg, const std::vector<Position2D>& targets,
                            RandomStream& rng) {
    OracleScene scene;
    const int k = static_cast<int>(targets.size());
    for (const RadarPairConfig& pair : cfg.pairs) {
        std::vector<AnglePair> angles;
        for (const Position2D& t : targets) angles.push_back(angles_for_target(pair, t));
        const ChannelCoefficients c =
            generate_coefficients(pair, targets, AmplitudeModel::unit, rng);
        const ChannelObservation obs{
            pair.pair_id, synthesize_channel(pair, steering_matrix(angles, pair), c)};
        scene.covs.push_back(sample_covariance(obs, pair));
        scene.decs.push_back(decompose(scene.covs.back(), k));
        scene.ests.push_back(
            preestimate_angles(scene.decs.back(), pair, k, cfg.angle_grid_step_rad()));
        scene.sbar.push_back(fusion_weight(scene.ests.back(), scene.covs.back(), pair));
    }
    return scene;
}

std::vector<Position2D> proposed_peaks(const ScenarioConfig& cfg, const OracleScene& scene,
                                       const SearchGrid& grid, int k) {
    std::vector<LikelihoodMap> maps;
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        maps.push_back(pair_likelihood_map(scene.decs[p], scene.ests[p], scene.covs[p],
                                           cfg.pairs[p], grid, FusionMethod::proposed));
    }
    // exclusion scaled to the lobe size on the (possibly coarse) oracle grid
    const double exclusion = std::max(cfg.peak_exclusion_radius_m, 3.0 * grid.step);
    return select_peaks(combine_maps(maps), k, exclusion);
}

bool within_one_cell(const std::vector<Position2D>& a, const std::vector<Position2D>& b,
                     double step) {
    if (a.size() != b.size()) return false;
    for (const Position2D& x : a) {
        double best = 1e300;
        for (const Position2D& y : b) {
            best = std::min(best, std::max(std::abs(x.x - y.x), std::abs(x.y - y.y)));
        }
        if (best > step + 1e-9) return false;
    }
    return true;
}

// Angular separation in beamwidths (2/M in sin space); resolvable when the
// larger of the AoD/AoA separations clears the threshold at every pair.
double separation_beamwidths(const ScenarioConfig& cfg, Position2D t1, Position2D t2) {
    double worst = 1e300;
    for (const RadarPairConfig& pair : cfg.pairs) {
        const AnglePair a = angles_for_target(pair, t1);
        const AnglePair b = angles_for_target(pair, t2);
        const double tx_sep = std::abs(std::sin(a.aod) - std::sin(b.aod)) /
                              (2.0 / pair.tx.elements);
        const double rx_sep = std::abs(std::sin(a.aoa) - std::sin(b.aoa)) /
                              (2.0 / pair.rx.elements);
        worst = std::min(worst, std::max(tx_sep, rx_sep));
    }
    return worst;
}

void criterion5() {
    const ScenarioConfig cfg = default_scenario();
    RandomStream rng(20250808);
    int pass_k1 = 0;
    const int n_k1 = 20;
    for (int scene_idx = 0; scene_idx < n_k1; ++scene_idx) {
        const std::vector<Position2D> targets{
            {rng.uniform(cfg.target_region.x_min, cfg.target_region.x_max),
             rng.uniform(cfg.target_region.y_min, cfg.target_region.y_max)}};
        const OracleScene scene = noiseless_scene(cfg, targets, rng);
        const std::vector<Position2D> oracle =
            exact_ml_oracle(scene.covs, cfg.pairs, cfg.grid, 1, cfg.oracle_budget);
        const std::vector<Position2D> prop = proposed_peaks(cfg, scene, cfg.grid, 1);
        if (within_one_cell(oracle, prop, cfg.grid.step)) ++pass_k1;
    }

    // K=2 on a coarse grid the exhaustive oracle can afford. Targets sit on
    // lattice cells: along a pair's flat ridge direction, off-lattice truth
    // would let the two estimators quantize to different (equally good)
    // cells, which is not the disagreement this criterion is after.
    SearchGrid coarse = cfg.grid;
    coarse.step = 1.0;
    const auto snap = [&](Position2D p) {
        const int ix = static_cast<int>(std::round((p.x - coarse.x_min) / coarse.step));
        const int iy = static_cast<int>(std::round((p.y - coarse.y_min) / coarse.step));
        return coarse.point(std::clamp(ix, 0, coarse.nx() - 1),
                            std::clamp(iy, 0, coarse.ny() - 1));
    };
    int pass_k2 = 0;
    const int n_k2 = 10;
    for (int scene_idx = 0; scene_idx < n_k2; ++scene_idx) {
        std::vector<Position2D> targets;
        for (;;) {
            targets = {snap({rng.uniform(cfg.target_region.x_min, cfg.target_region.x_max),
                             rng.uniform(cfg.target_region.y_min, cfg.target_region.y_max)}),
                       snap({rng.uniform(cfg.target_region.x_min, cfg.target_region.x_max),
                             rng.uniform(cfg.target_region.y_min, cfg.target_region.y_max)})};
            if (distance(targets[0], targets[1]) < 1e-9) continue;
            if (separation_beamwidths(cfg, targets[0], targets[1]) > 2.0) break;
        }
        const OracleScene scene = noiseless_scene(cfg, targets, rng);
        const std::vector<Position2D> oracle =
            exact_ml_oracle(scene.covs, cfg.pairs, coarse, 2, cfg.oracle_budget);
        const std::vector<Position2D> prop = proposed_peaks(cfg, scene, coarse, 2);
        if (within_one_cell(oracle, prop, coarse.step)) ++pass_k2;
    }

    report(5, "proposed matches the exact ML oracle on noiseless scenes",
           pass_k1 == n_k1 && pass_k2 == n_k2,
           "K=1: " + std::to_string(pass_k1) + "/" + std::to_string(n_k1) +
               ", K=2: " + std::to_string(pass_k2) + "/" + std::to_string(n_k2));
}

// ---------------------------------------------------------------- criterion 6
void criterion6() {
    const ScenarioConfig cfg = default_scenario();
    const RadarPairConfig& pair = cfg.pairs[0];
    RandomStream rng(608);
    bool ok = true;
    std::ostringstream os;

    // noiseless two-target scene shared by several checks
    const std::vector<Position2D> targets{{-3.0, 7.0}, {4.0, 9.0}};
    std::vector<AnglePair> angles;
    for (const Position2D& t : targets) angles.push_back(angles_for_target(pair, t));
    const ChannelCoefficients coeff =
        generate_coefficients(pair, targets, AmplitudeModel::unit, rng);
    const Eigen::MatrixXcd steering = steering_matrix(angles, pair);
    const ChannelObservation obs{pair.pair_id, synthesize_channel(pair, steering, coeff)};
    const CovarianceSet cov = sample_covariance(obs, pair);
    const SubspaceDecomposition dec = decompose(cov, 2);
    const int dim = pair.joint_dim();

    const double herm = (dec.projector - dec.projector.adjoint()).cwiseAbs().maxCoeff();
    const double idem =
        (dec.projector * dec.projector - dec.projector).cwiseAbs().maxCoeff();
    const double trace_err = std::abs(dec.projector.real().trace() - 2.0);
    if (herm > 1e-9 || idem > 1e-9 || trace_err > 1e-9) {
        ok = false;
        os << "projector invariants violated; ";
    }

    const Eigen::MatrixXcd pinv = pseudo_inverse(steering);
    const double pinv_err =
        (pinv * steering - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff();
    if (pinv_err > 1e-10) {
        ok = false;
        os << "A+A deviates by " << pinv_err << "; ";
    }

    // the two routes to the coefficient covariance estimate
    Eigen::MatrixXcd brute = Eigen::MatrixXcd::Zero(2, 2);
    for (int q = 0; q < pair.subcarriers; ++q) {
        const Eigen::VectorXcd alpha_hat = pinv * obs.h.row(q).transpose();
        brute += alpha_hat * alpha_hat.adjoint();
    }
    brute /= double(pair.subcarriers);
    const double two_form =
        (coefficient_covariance(steering, cov) - brute).cwiseAbs().maxCoeff();
    if (two_form > 1e-9) {
        ok = false;
        os << "coefficient covariance routes diverge by " << two_form << "; ";
    }

    for (const AnglePair& a : angles) {
        const double v = music_value(dec.projector, joint_steering_vector(a, pair));
        if (std::abs(v - dim) > 1e-6) {
            ok = false;
            os << "music at a true angle is " << v << " not " << dim << "; ";
        }
    }

    if (diagonality(Eigen::MatrixXcd::Identity(3, 3)) != 1.0 ||
        diagonality(Eigen::MatrixXcd::Ones(3, 3)) != 0.0) {
        ok = false;
        os << "diagonality anchors broken; ";
    }

    report(6, "subspace invariant suite at pinned tolerances", ok,
           ok ? "projector/pinv/two-form/music/diagonality all within tolerance" : os.str());
}

// ---------------------------------------------------------------- criterion 7
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing:" + path + ">";
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion7() {
    const fs::path dir =
        fs::temp_directory_path() / ("mstatic_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string cli = MSTATIC_CLI_PATH;

    ScenarioConfig cfg = default_scenario();
    cfg.trials = 12;
    const std::string cfg_path = (dir / "cfg.json").string();
    {
        std::ofstream out(cfg_path, std::ios::binary);
        out << scenario_to_json(cfg).dump(2) << "\n";
    }
    const auto shell = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };

    bool ok = true;
    ok = ok && shell("mc --config " + cfg_path + " --seed 7 --out " + (dir / "a").string());
    ok = ok && shell("mc --config " + cfg_path + " --seed 7 --out " + (dir / "b").string());
    ok = ok && shell("mc --config " + cfg_path + " --seed 7 --threads 4 --out " +
                     (dir / "c").string());
    ok = ok && shell("map --config " + cfg_path + " --seed 7 --out " + (dir / "m1").string());
    ok = ok && shell("map --config " + cfg_path + " --seed 7 --out " + (dir / "m2").string());

    bool identical = ok;
    if (ok) {
        identical =
            slurp((dir / "a/report.json").string()) == slurp((dir / "b/report.json").string()) &&
            slurp((dir / "a/trials.jsonl").string()) ==
                slurp((dir / "b/trials.jsonl").string()) &&
            slurp((dir / "a/report.json").string()) == slurp((dir / "c/report.json").string()) &&
            slurp((dir / "a/trials.jsonl").string()) ==
                slurp((dir / "c/trials.jsonl").string()) &&
            slurp((dir / "m1/map_proposed_combined.csv").string()) ==
                slurp((dir / "m2/map_proposed_combined.csv").string()) &&
            slurp((dir / "m1/scene.json").string()) == slurp((dir / "m2/scene.json").string());
    }
    fs::remove_all(dir);
    report(7, "byte-identical reports and maps across runs and thread counts", identical,
           ok ? (identical ? "reports, trial logs, and maps match byte for byte"
                           : "outputs differ between runs")
              : "CLI invocation failed");
}

// ---------------------------------------------------------------- criterion 8
void criterion8() {
    const fs::path dir =
        fs::temp_directory_path() / ("mstatic_accept8_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    ScenarioConfig cfg = default_scenario();
    const SceneData scene = simulate_scene(cfg, 0);
    const FileMeta meta{cfg.digest(), cfg.seed};

    double worst = 0.0;
    bool ok = true;
    std::vector<LikelihoodMap> from_memory, from_file;
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        const std::string path = (dir / ("cov" + std::to_string(p) + ".txt")).string();
        export_covariance(scene.covariances[p], path, meta);
        const CovarianceSet imported = import_covariance(path);

        const SubspaceDecomposition dec = decompose(imported, cfg.num_targets);
        const AngleEstimate est =
            preestimate_angles(dec, cfg.pairs[p], cfg.num_targets, cfg.angle_grid_step_rad(),
                               cfg.angle_exclusion_cells);
        from_file.push_back(pair_likelihood_map(dec, est, imported, cfg.pairs[p], cfg.grid,
                                                FusionMethod::proposed));
        from_memory.push_back(
            pair_likelihood_map(scene.decompositions[p], scene.estimates[p],
                                scene.covariances[p], cfg.pairs[p], cfg.grid,
                                FusionMethod::proposed));
    }
    const LikelihoodMap combined_memory = combine_maps(from_memory);
    const LikelihoodMap combined_file = combine_maps(from_file);
    for (std::size_t i = 0; i < combined_memory.values.size(); ++i) {
        const double a = combined_memory.values[i];
        const double b = combined_file.values[i];
        if (a == kOutOfField || b == kOutOfField) {
            ok = ok && a == b;
            continue;
        }
        const double rel = std::abs(a - b) / std::max(1.0, std::abs(a));
        worst = std::max(worst, rel);
    }
    ok = ok && worst <= 1e-12;
    fs::remove_all(dir);
    std::ostringstream os;
    os << "max relative map deviation " << worst;
    report(8, "fusion from exported covariance files equals in-memory fusion", ok, os.str());
}

}  // namespace

int main() {
    if (const char* env = std::getenv("MSTATIC_ACCEPT_TRIALS")) g_trials = std::atoi(env);
    if (const char* env = std::getenv("MSTATIC_ACCEPT_THREADS")) g_threads = std::atoi(env);
    if (g_trials < 1) g_trials = 2000;
    if (g_threads < 1) g_threads = 1;
    std::cout << "acceptance suite: " << g_trials << " trials per experiment, " << g_threads
              << " thread(s)\n";

    const ExperimentReport base = criterion1();
    const ExperimentReport more_antennas = criterion2(base);
    criterion3(base, more_antennas);
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();

    std::cout << (g_failures == 0 ? "all criteria passed"
                                  : std::to_string(g_failures) + " criteria failed")
              << "\n";
    return g_failures == 0 ? 0 : 1;
}
