#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mstatic/geometry.hpp"
#include "mstatic/subspace.hpp"

namespace mstatic {

/// Likelihood value assigned to grid points outside some array's field of
/// view. Steering vectors are ambiguous beyond +-90 degrees, so those points
/// are excluded rather than wrapped.
inline constexpr double kOutOfField = -std::numeric_limits<double>::infinity();

/// Fusion rules evaluated by the simulator. `proposed` is the weighted MUSIC
/// combination; the others are the reference methods it is compared against.
enum class FusionMethod {
    proposed,  // per-pair MUSIC map scaled by Q/(2 sigma^2) and the estimated signal power
    method_a,  // same without the signal-power weight
    method_b,  // signal power approximated by the Bartlett form a^H R a at each tested point
    fft2d,     // classical 2D Fourier processing: Bartlett form alone
    soft,      // weighted average of per-pair local position decisions
};

std::string method_name(FusionMethod method);
FusionMethod method_from_name(const std::string& name);

/// Rectangular (x, y) search lattice. Point (ix, iy) sits at
/// (x_min + ix*step, y_min + iy*step); linear index iy*nx + ix (row-major,
/// one row per y value).
struct SearchGrid {
    double x_min = -10.0;
    double x_max = 10.0;
    double y_min = 1.0;
    double y_max = 19.0;
    double step = 0.25;

    bool operator==(const SearchGrid&) const = default;

    int nx() const { return count(x_min, x_max); }
    int ny() const { return count(y_min, y_max); }
    int size() const { return nx() * ny(); }
    int index(int ix, int iy) const { return iy * nx() + ix; }
    Position2D point(int ix, int iy) const { return {x_min + ix * step, y_min + iy * step}; }
    void validate() const;

private:
    int count(double lo, double hi) const {
        return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    }
};

/// Scalar field over a SearchGrid for one method; pair_id -1 marks a
/// combined (all pairs) map. Values are finite or kOutOfField.
struct LikelihoodMap {
    SearchGrid grid;
    FusionMethod method = FusionMethod::proposed;
    int pair_id = -1;
    std::vector<double> values;
};

/// K angle pairs picked from the MUSIC pseudo-spectrum of one pair.
struct AngleEstimate {
    int pair_id = 0;
    std::vector<AnglePair> angles;
    std::vector<double> peak_values;
    bool used_fallback = false;  // fewer than K local maxima existed
};

/// Per-pair quadratic forms over the grid, shared by every map method:
/// music = a^H Gamma a and bartlett = a^H R a at each in-field point.
struct PairGridFields {
    std::vector<double> music;
    std::vector<double> bartlett;
    std::vector<char> in_field;
};

/// Picks the K largest local maxima (8-neighborhood) of the MUSIC
/// pseudo-spectrum over a symmetric (aod, aoa) lattice with the given step.
/// Greedy selection skips candidates within `exclusion_cells` lattice cells
/// of an accepted peak in BOTH coordinates; when fewer than K local maxima
/// exist the remainder is filled with the largest unselected lattice values.
AngleEstimate preestimate_angles(const SubspaceDecomposition& dec, const RadarPairConfig& pair,
                                 int num_targets, double angle_step_rad, int exclusion_cells = 2);

/// Estimated total received signal power of one pair: the sum of the real
/// diagonal of the coefficient covariance at the pre-estimated angles,
/// negative entries clamped to zero. Falls back to the regularized
/// pseudo-inverse when the pre-estimates make the steering matrix rank
/// deficient, so the weight stays finite.
double fusion_weight(const AngleEstimate& est, const CovarianceSet& cov,
                     const RadarPairConfig& pair);

/// Evaluates the two per-pair quadratic forms over every in-field grid point.
PairGridFields evaluate_pair_fields(const SubspaceDecomposition& dec, const CovarianceSet& cov,
                                    const RadarPairConfig& pair, const SearchGrid& grid);

/// Assembles one pair's likelihood map from precomputed fields.
/// `signal_power_weight` is only consumed by FusionMethod::proposed.
LikelihoodMap pair_map_from_fields(const PairGridFields& fields, const SearchGrid& grid,
                                   const RadarPairConfig& pair, FusionMethod method,
                                   double signal_power_weight);

/// One pair's likelihood map for a map-based method (everything but soft).
LikelihoodMap pair_likelihood_map(const SubspaceDecomposition& dec, const AngleEstimate& est,
                                  const CovarianceSet& cov, const RadarPairConfig& pair,
                                  const SearchGrid& grid, FusionMethod method);

/// Pointwise sum over pairs; a point out of field for any pair is out of
/// field in the combined map. Grids and methods must match.
LikelihoodMap combine_maps(std::span<const LikelihoodMap> maps);

struct PeakPick {
    int ix = 0;
    int iy = 0;
    double value = 0.0;
};

/// K largest local maxima (8-neighborhood) with greedy exclusion: candidates
/// closer than `exclusion_radius_m` to an accepted peak are skipped. Ties
/// break on row-major lattice order; when local maxima run out, the largest
/// unselected in-field values fill the remainder.
std::vector<PeakPick> select_peak_cells(const LikelihoodMap& map, int num_peaks,
                                        double exclusion_radius_m);

std::vector<Position2D> select_peaks(const LikelihoodMap& map, int num_peaks,
                                     double exclusion_radius_m);

/// Parametric soft fusion: per pair, pick K peaks from the unweighted
/// (method_a) map, associate them with the true positions (the association
/// is idealized, exactly as in the reference method), then average the
/// per-pair decisions weighted by their local map values.
std::vector<Position2D> soft_fusion(std::span<const LikelihoodMap> per_pair_maps,
                                    std::span<const Position2D> true_positions, int num_targets,
                                    double exclusion_radius_m);

/// Exhaustive maximum-likelihood search over all K-subsets of in-field grid
/// points, maximizing sum_p Q_p/(2 sigma_p^2) Tr{A_p A_p^+ R_p}. Validation
/// oracle only; refuses when the hypothesis count exceeds `budget`.
std::vector<Position2D> exact_ml_oracle(std::span<const CovarianceSet> covs,
                                        std::span<const RadarPairConfig> pairs,
                                        const SearchGrid& grid, int num_targets,
                                        std::uint64_t budget = 5'000'000);

}  // namespace mstatic
