#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "mstatic/geometry.hpp"
#include "mstatic/rng.hpp"

namespace mstatic {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Range at which the inverse_product amplitude model yields amplitude 1.
inline constexpr double kReferenceRange = 10.0;  // m

/// Per-target amplitude statistics of the channel coefficients.
enum class AmplitudeModel {
    unit,             // every target has amplitude 1
    inverse_product,  // ref^2 / (d_tx * d_rx), amplitude 1 at the reference range
    random_complex,   // circular complex Gaussian per trial (Swerling-1-like)
};

std::string amplitude_model_name(AmplitudeModel model);
AmplitudeModel amplitude_model_from_name(const std::string& name);

/// Channel coefficients alpha(q, k): subcarrier q, target k. Phases decrease
/// linearly across subcarriers with the bistatic delay of each target.
struct ChannelCoefficients {
    Eigen::MatrixXcd alpha;  // Q_p x K
};

/// Noisy estimated channel of one pair; row q is h~_{p,q}^T.
struct ChannelObservation {
    int pair_id = 0;
    Eigen::MatrixXcd h;  // Q_p x (M_p N_p)
};

/// Propagation delay tx -> target -> rx in seconds.
double bistatic_delay(const RadarPairConfig& pair, Position2D target);

/// Draw channel coefficients for one pair and trial. Per target: one uniform
/// initial phase, plus one complex Gaussian when the model is random_complex;
/// draws happen in target order (part of the determinism contract).
ChannelCoefficients generate_coefficients(const RadarPairConfig& pair,
                                          std::span<const Position2D> targets,
                                          AmplitudeModel model, RandomStream& rng);

/// Noiseless channel matrix, row q = (A_p alpha_q)^T. Size Q_p x (M_p N_p).
Eigen::MatrixXcd synthesize_channel(const RadarPairConfig& pair, const Eigen::MatrixXcd& steering,
                                    const ChannelCoefficients& coeffs);

/// Adds independent circular complex Gaussian noise of total per-entry
/// variance sigma2 (sigma2/2 per real/imaginary part). Entries are drawn in
/// row-major order (subcarrier, then element).
ChannelObservation add_estimation_noise(const Eigen::MatrixXcd& clean, double sigma2, int pair_id,
                                        RandomStream& rng);

}  // namespace mstatic
