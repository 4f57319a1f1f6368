#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstatic/experiment.hpp"
#include "mstatic/fusion.hpp"
#include "mstatic/subspace.hpp"

namespace mstatic {

/// Audit trail embedded in every output file.
struct FileMeta {
    std::string scenario_digest;
    std::uint64_t seed = 0;
};

enum class MapScale {
    linear,
    db,  // 10 log10(value / max), highest peak at 0 dB
};

/// CSV map format: `# key=value` comment lines (digest, seed, method, pair,
/// scale), a `x,y,value` header, then one row per lattice point in row-major
/// order (y outer, x inner). Out-of-field points have an empty value field;
/// so do zero-power points in dB mode. Locale-independent throughout.
void export_map(const LikelihoodMap& map, const std::string& path, const FileMeta& meta,
                MapScale scale = MapScale::linear);

struct ImportedMap {
    LikelihoodMap map;
    FileMeta meta;
    MapScale scale = MapScale::linear;
};

ImportedMap import_map(const std::string& path);

/// Covariance exchange format (the pair -> central-processor payload):
/// comment lines, then a header line `pair_id,Q,sigma2,dim`, then dim^2
/// lines of `re,im` in row-major order.
void export_covariance(const CovarianceSet& cov, const std::string& path, const FileMeta& meta);

/// Validates Hermitian symmetry to 1e-9 before accepting the payload.
CovarianceSet import_covariance(const std::string& path);

nlohmann::json report_to_json(const ExperimentReport& report);
void write_report(const ExperimentReport& report, const std::string& path);

/// One file holding the report of every sweep run in Q-list order.
void write_sweep_reports(std::span<const ExperimentReport> reports, const FileMeta& meta,
                         const std::string& path);

/// JSON-lines trial log; the first line is a header record carrying the
/// scenario digest and seed, then one record per TrialResult.
void write_trial_log(std::span<const TrialResult> results, const std::string& path,
                     const FileMeta& meta);

std::vector<TrialResult> read_trial_log(const std::string& path);

}  // namespace mstatic
