#include "mstatic/channel.hpp"

#include <stdexcept>

namespace mstatic {

std::string amplitude_model_name(AmplitudeModel model) {
    switch (model) {
        case AmplitudeModel::unit: return "unit";
        case AmplitudeModel::inverse_product: return "inverse_product";
        case AmplitudeModel::random_complex: return "random_complex";
    }
    throw std::invalid_argument("unknown amplitude model");
}

AmplitudeModel amplitude_model_from_name(const std::string& name) {
    if (name == "unit") return AmplitudeModel::unit;
    if (name == "inverse_product") return AmplitudeModel::inverse_product;
    if (name == "random_complex") return AmplitudeModel::random_complex;
    throw std::invalid_argument("amplitude_model: unknown value '" + name + "'");
}

double bistatic_delay(const RadarPairConfig& pair, Position2D target) {
    const double d_tx = distance(target, pair.tx.origin);
    const double d_rx = distance(target, pair.rx.origin);
    if (d_tx < 1e-12 || d_rx < 1e-12) {
        throw std::invalid_argument("bistatic_delay: target coincides with an array origin");
    }
    return (d_tx + d_rx) / kSpeedOfLight;
}

ChannelCoefficients generate_coefficients(const RadarPairConfig& pair,
                                          std::span<const Position2D> targets,
                                          AmplitudeModel model, RandomStream& rng) {
    const int num_targets = static_cast<int>(targets.size());
    if (num_targets < 1) throw std::invalid_argument("generate_coefficients: need at least one target");
    for (const Position2D& t : targets) {
        if (!in_field(pair, t)) {
            throw std::domain_error("generate_coefficients: target out of field for pair " +
                                    std::to_string(pair.pair_id));
        }
    }

    std::vector<double> delay(targets.size());
    std::vector<double> amplitude(targets.size(), 1.0);
    for (int k = 0; k < num_targets; ++k) {
        delay[k] = bistatic_delay(pair, targets[k]);
    }
    if (model == AmplitudeModel::inverse_product) {
        // Radar-range-equation-like attenuation, anchored at a fixed
        // reference range so the same target has comparable amplitude at
        // every pair (the between-pair power ratio is what the fusion
        // weight is supposed to see).
        for (int k = 0; k < num_targets; ++k) {
            const double d_tx = distance(targets[k], pair.tx.origin);
            const double d_rx = distance(targets[k], pair.rx.origin);
            amplitude[k] = kReferenceRange * kReferenceRange / (d_tx * d_rx);
        }
    }

    ChannelCoefficients coeffs;
    coeffs.alpha.resize(pair.subcarriers, num_targets);
    for (int k = 0; k < num_targets; ++k) {
        const double psi = rng.uniform(0.0, 2.0 * kPi);
        std::complex<double> gain = std::polar(amplitude[k], psi);
        if (model == AmplitudeModel::random_complex) {
            gain = rng.complex_gaussian(1.0) * std::polar(1.0, psi);
        }
        const double phase_step = -2.0 * kPi * pair.subcarrier_spacing_hz * delay[k];
        for (int q = 0; q < pair.subcarriers; ++q) {
            coeffs.alpha(q, k) = gain * std::polar(1.0, phase_step * q);
        }
    }
    return coeffs;
}

Eigen::MatrixXcd synthesize_channel(const RadarPairConfig& pair, const Eigen::MatrixXcd& steering,
                                    const ChannelCoefficients& coeffs) {
    if (steering.rows() != pair.joint_dim() || steering.cols() != coeffs.alpha.cols() ||
        coeffs.alpha.rows() != pair.subcarriers) {
        throw std::invalid_argument("synthesize_channel: dimension mismatch");
    }
    // row q = (A alpha_q)^T  ==  H = alpha * A^T
    return coeffs.alpha * steering.transpose();
}

ChannelObservation add_estimation_noise(const Eigen::MatrixXcd& clean, double sigma2, int pair_id,
                                        RandomStream& rng) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("add_estimation_noise: sigma2 must be > 0");
    ChannelObservation obs;
    obs.pair_id = pair_id;
    obs.h = clean;
    for (Eigen::Index q = 0; q < clean.rows(); ++q) {
        for (Eigen::Index i = 0; i < clean.cols(); ++i) {
            obs.h(q, i) += rng.complex_gaussian(sigma2);
        }
    }
    return obs;
}

}  // namespace mstatic
