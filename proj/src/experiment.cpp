#include "mstatic/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mstatic/assignment.hpp"
#include "mstatic/digest.hpp"
#include "mstatic/subspace.hpp"

namespace mstatic {

const MethodSummary& ExperimentReport::summary(FusionMethod method) const {
    for (const auto& [m, s] : methods) {
        if (m == method) return s;
    }
    throw std::invalid_argument("report has no entry for method " + method_name(method));
}

namespace {

std::vector<Position2D> draw_targets(const ScenarioConfig& cfg, RandomStream& rng) {
    const Rect& region = cfg.target_region;
    constexpr int kMaxAttempts = 100000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::vector<Position2D> targets(static_cast<std::size_t>(cfg.num_targets));
        for (auto& t : targets) {
            t.x = rng.uniform(region.x_min, region.x_max);
            t.y = rng.uniform(region.y_min, region.y_max);
        }
        bool ok = true;
        for (std::size_t i = 0; i < targets.size() && ok; ++i) {
            for (std::size_t j = i + 1; j < targets.size() && ok; ++j) {
                if (distance(targets[i], targets[j]) < cfg.min_target_separation_m) ok = false;
            }
            for (const RadarPairConfig& pair : cfg.pairs) {
                if (!in_field(pair, targets[i])) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) return targets;
    }
    throw std::runtime_error("draw_targets: could not satisfy separation/field constraints");
}

std::uint64_t digest_observations(std::span<const ChannelObservation> observations) {
    Fnv1a64 h;
    for (const ChannelObservation& obs : observations) {
        for (Eigen::Index q = 0; q < obs.h.rows(); ++q) {
            for (Eigen::Index i = 0; i < obs.h.cols(); ++i) {
                h.update(obs.h(q, i).real());
                h.update(obs.h(q, i).imag());
            }
        }
    }
    return h.value();
}

}  // namespace

SceneData simulate_scene(const ScenarioConfig& cfg, int trial_index, bool noiseless) {
    cfg.validate();
    RandomStream rng = RandomStream::for_trial(cfg.seed, static_cast<std::uint64_t>(trial_index));

    SceneData scene;
    scene.truth = draw_targets(cfg, rng);

    // Fixed draw order: targets, then per pair coefficients and noise.
    for (const RadarPairConfig& pair : cfg.pairs) {
        std::vector<AnglePair> angles;
        angles.reserve(scene.truth.size());
        for (const Position2D& t : scene.truth) angles.push_back(angles_for_target(pair, t));

        const ChannelCoefficients coeffs =
            generate_coefficients(pair, scene.truth, cfg.amplitude_model, rng);
        const Eigen::MatrixXcd steering = steering_matrix(angles, pair);
        const Eigen::MatrixXcd clean = synthesize_channel(pair, steering, coeffs);
        scene.observations.push_back(
            noiseless ? ChannelObservation{pair.pair_id, clean}
                      : add_estimation_noise(clean, pair.noise_variance, pair.pair_id, rng));
    }
    scene.channel_digest = digest_observations(scene.observations);

    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        const RadarPairConfig& pair = cfg.pairs[p];
        scene.covariances.push_back(sample_covariance(scene.observations[p], pair));
        scene.decompositions.push_back(decompose(scene.covariances[p], cfg.num_targets));
        scene.estimates.push_back(preestimate_angles(scene.decompositions[p], pair,
                                                     cfg.num_targets, cfg.angle_grid_step_rad(),
                                                     cfg.angle_exclusion_cells));

        const Eigen::MatrixXcd a_hat = steering_matrix(scene.estimates[p].angles, pair);
        Eigen::MatrixXcd coeff_cov;
        try {
            coeff_cov = coefficient_covariance(a_hat, scene.covariances[p]);
        } catch (const std::runtime_error&) {
            coeff_cov = regularized_coefficient_covariance(a_hat, scene.covariances[p]);
        }
        double sbar = 0.0;
        for (Eigen::Index k = 0; k < coeff_cov.rows(); ++k) {
            sbar += std::max(0.0, coeff_cov(k, k).real());
        }
        scene.signal_power_weights.push_back(sbar);
        scene.pair_diagonality.push_back(coeff_cov.cwiseAbs2().sum() > 0.0
                                             ? diagonality(coeff_cov)
                                             : 0.0);
        scene.fields.push_back(
            evaluate_pair_fields(scene.decompositions[p], scene.covariances[p], pair, cfg.grid));
    }
    return scene;
}

std::vector<double> associate_and_score(std::span<const Position2D> truth,
                                        std::span<const Position2D> estimates) {
    if (truth.size() != estimates.size()) {
        throw std::invalid_argument("associate_and_score: cardinality mismatch");
    }
    const Assignment match = optimal_assignment(truth, estimates);
    std::vector<double> errors(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const Vec2 d = truth[i] - estimates[static_cast<std::size_t>(match.to_b[i])];
        errors[i] = dot(d, d);
    }
    return errors;
}

std::vector<TrialResult> run_trial(const ScenarioConfig& cfg, int trial_index,
                                   std::span<const FusionMethod> methods) {
    const SceneData scene = simulate_scene(cfg, trial_index);

    std::vector<TrialResult> results;
    results.reserve(methods.size());
    for (FusionMethod method : methods) {
        std::vector<Position2D> estimates;
        if (method == FusionMethod::soft) {
            std::vector<LikelihoodMap> maps;
            for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
                maps.push_back(pair_map_from_fields(scene.fields[p], cfg.grid, cfg.pairs[p],
                                                    FusionMethod::method_a, 1.0));
            }
            estimates = soft_fusion(maps, scene.truth, cfg.num_targets,
                                    cfg.peak_exclusion_radius_m);
        } else {
            std::vector<LikelihoodMap> maps;
            for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
                maps.push_back(pair_map_from_fields(scene.fields[p], cfg.grid, cfg.pairs[p],
                                                    method, scene.signal_power_weights[p]));
            }
            const LikelihoodMap combined = combine_maps(maps);
            estimates = select_peaks(combined, cfg.num_targets, cfg.peak_exclusion_radius_m);
        }

        TrialResult result;
        result.trial = trial_index;
        result.method = method;
        result.truth = scene.truth;
        result.estimates = std::move(estimates);
        result.squared_errors = associate_and_score(result.truth, result.estimates);
        result.pair_diagonality = scene.pair_diagonality;
        result.channel_digest = scene.channel_digest;
        results.push_back(std::move(result));
    }
    return results;
}

ExperimentReport aggregate_trials(const std::string& scenario_digest, std::uint64_t seed,
                                  std::span<const FusionMethod> methods,
                                  std::span<const int> subcarriers,
                                  const std::vector<std::vector<TrialResult>>& per_trial) {
    ExperimentReport report;
    report.scenario_digest = scenario_digest;
    report.seed = seed;
    report.trials = static_cast<int>(per_trial.size());
    report.subcarriers.assign(subcarriers.begin(), subcarriers.end());

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        double sum = 0.0;
        double sum_sq = 0.0;
        std::int64_t n = 0;
        for (const auto& trial : per_trial) {
            for (const double e : trial[mi].squared_errors) {
                sum += e;
                sum_sq += e * e;
                ++n;
            }
        }
        MethodSummary s;
        s.trials = report.trials;
        if (n > 0) {
            const double mse = sum / double(n);
            s.rmse_m = std::sqrt(mse);
            if (n > 1) {
                const double var = std::max(0.0, (sum_sq - double(n) * mse * mse) / double(n - 1));
                const double hw_mse = 1.96 * std::sqrt(var / double(n));
                s.ci95_m = s.rmse_m > 1e-12 ? hw_mse / (2.0 * s.rmse_m) : std::sqrt(hw_mse);
            }
        }
        report.methods.emplace_back(methods[mi], s);
    }

    if (!per_trial.empty() && !per_trial.front().empty()) {
        const std::size_t n_pairs = per_trial.front().front().pair_diagonality.size();
        report.pair_mean_diagonality.assign(n_pairs, 0.0);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const auto& trial : per_trial) {
            const auto& zeta = trial.front().pair_diagonality;
            double trial_mean = 0.0;
            for (std::size_t p = 0; p < n_pairs; ++p) {
                report.pair_mean_diagonality[p] += zeta[p];
                trial_mean += zeta[p];
            }
            trial_mean /= double(n_pairs);
            sum += trial_mean;
            sum_sq += trial_mean * trial_mean;
        }
        const auto n = double(per_trial.size());
        for (double& z : report.pair_mean_diagonality) z /= n;
        report.mean_diagonality = sum / n;
        if (per_trial.size() > 1) {
            const double var =
                std::max(0.0, (sum_sq - n * report.mean_diagonality * report.mean_diagonality) /
                                  (n - 1.0));
            report.diagonality_ci95 = 1.96 * std::sqrt(var / n);
        }
    }
    return report;
}

ExperimentReport run_experiment(const ScenarioConfig& cfg, int n_trials,
                                std::span<const FusionMethod> methods, int n_threads,
                                std::vector<TrialResult>* trial_log) {
    if (n_trials < 1) throw std::invalid_argument("run_experiment: n_trials must be >= 1");
    if (methods.empty()) throw std::invalid_argument("run_experiment: no methods requested");
    cfg.validate();

    std::vector<std::vector<TrialResult>> per_trial(static_cast<std::size_t>(n_trials));
    const int workers = std::max(1, n_threads);
    if (workers == 1) {
        for (int t = 0; t < n_trials; ++t) {
            per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t, methods);
        }
    } else {
        std::atomic<int> next{0};
        auto work = [&] {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= n_trials) break;
                per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t, methods);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    std::vector<int> subcarriers;
    for (const RadarPairConfig& pair : cfg.pairs) subcarriers.push_back(pair.subcarriers);
    ExperimentReport report =
        aggregate_trials(cfg.digest(), cfg.seed, methods, subcarriers, per_trial);

    if (trial_log) {
        trial_log->clear();
        for (const auto& trial : per_trial) {
            trial_log->insert(trial_log->end(), trial.begin(), trial.end());
        }
    }
    return report;
}

std::vector<ExperimentReport> sweep_subcarriers(const ScenarioConfig& cfg,
                                                std::span<const int> q_list, int n_trials,
                                                int n_threads) {
    if (q_list.empty()) throw std::invalid_argument("sweep_subcarriers: empty Q list");
    std::vector<ExperimentReport> reports;
    for (std::size_t i = 0; i < q_list.size(); ++i) {
        ScenarioConfig run_cfg = cfg;
        for (RadarPairConfig& pair : run_cfg.pairs) pair.subcarriers = q_list[i];
        run_cfg.seed = RandomStream::split_mix64(cfg.seed ^ (0x51ED2700ULL + i));
        reports.push_back(run_experiment(run_cfg, n_trials, cfg.methods, n_threads));
    }
    return reports;
}

}  // namespace mstatic
