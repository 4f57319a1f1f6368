#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mstatic/config.hpp"
#include "mstatic/fusion.hpp"

namespace mstatic {

/// Outcome of one method on one Monte Carlo trial.
struct TrialResult {
    int trial = 0;
    FusionMethod method = FusionMethod::proposed;
    std::vector<Position2D> truth;
    std::vector<Position2D> estimates;
    std::vector<double> squared_errors;    // truth order, m^2
    std::vector<double> pair_diagonality;  // zeta of S^ per pair, shared across methods
    std::uint64_t channel_digest = 0;      // hash of the shared noisy observations
};

struct MethodSummary {
    double rmse_m = 0.0;
    double ci95_m = 0.0;  // 95% half-width in meters (delta method on the MSE)
    int trials = 0;
};

struct ExperimentReport {
    std::string scenario_digest;
    std::uint64_t seed = 0;
    int trials = 0;
    std::vector<int> subcarriers;  // per pair
    std::vector<std::pair<FusionMethod, MethodSummary>> methods;
    std::vector<double> pair_mean_diagonality;
    double mean_diagonality = 0.0;  // per-trial average across pairs, then across trials
    double diagonality_ci95 = 0.0;

    const MethodSummary& summary(FusionMethod method) const;
};

/// Everything one trial shares across methods: the drawn scene, the noisy
/// observations, and the per-pair processing products.
struct SceneData {
    std::vector<Position2D> truth;
    std::vector<ChannelObservation> observations;
    std::vector<CovarianceSet> covariances;
    std::vector<SubspaceDecomposition> decompositions;
    std::vector<AngleEstimate> estimates;
    std::vector<double> signal_power_weights;  // s-bar per pair
    std::vector<double> pair_diagonality;
    std::vector<PairGridFields> fields;
    std::uint64_t channel_digest = 0;
};

/// Draws targets, synthesizes channels, and runs the per-pair processing
/// chain. `noiseless` skips the estimation-noise draw (validation scenes).
SceneData simulate_scene(const ScenarioConfig& cfg, int trial_index, bool noiseless = false);

/// Minimal-total-squared-distance matching of estimates to truth; returns
/// the matched squared errors in truth order.
std::vector<double> associate_and_score(std::span<const Position2D> truth,
                                        std::span<const Position2D> estimates);

/// Runs every requested method on one shared scene draw.
std::vector<TrialResult> run_trial(const ScenarioConfig& cfg, int trial_index,
                                   std::span<const FusionMethod> methods);

/// Aggregates per-trial results into a report; aggregation order is fixed
/// (trial index, then target index) so reports are byte-stable.
ExperimentReport aggregate_trials(const std::string& scenario_digest, std::uint64_t seed,
                                  std::span<const FusionMethod> methods,
                                  std::span<const int> subcarriers,
                                  const std::vector<std::vector<TrialResult>>& per_trial);

/// Monte Carlo driver. Trials are independent work units with per-trial
/// seeded streams, so the result is identical for any thread count.
/// `trial_log`, when given, receives all TrialResults in (trial, method) order.
ExperimentReport run_experiment(const ScenarioConfig& cfg, int n_trials,
                                std::span<const FusionMethod> methods, int n_threads = 1,
                                std::vector<TrialResult>* trial_log = nullptr);

/// One experiment per subcarrier count, every pair set to the same Q.
/// Each run derives its own master seed from the scenario seed and the
/// position in the list.
std::vector<ExperimentReport> sweep_subcarriers(const ScenarioConfig& cfg,
                                                std::span<const int> q_list, int n_trials,
                                                int n_threads = 1);

}  // namespace mstatic
