#include "mstatic/geometry.hpp"

#include <stdexcept>

namespace mstatic {

void ArraySpec::validate() const {
    if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) {
        throw std::invalid_argument("origin: coordinates must be finite");
    }
    if (std::abs(normal.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("normal: must be a unit vector (|norm - 1| <= 1e-12)");
    }
    if (elements < 1) {
        throw std::invalid_argument("elements: must be >= 1");
    }
}

void RadarPairConfig::validate() const {
    try {
        tx.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("tx.") + e.what());
    }
    try {
        rx.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("rx.") + e.what());
    }
    if (subcarriers < 1) throw std::invalid_argument("subcarriers: must be >= 1");
    if (!(subcarrier_spacing_hz > 0.0)) throw std::invalid_argument("subcarrier_spacing_hz: must be > 0");
    if (!(carrier_freq_hz > 0.0)) throw std::invalid_argument("carrier_freq_hz: must be > 0");
    if (!(noise_variance > 0.0)) throw std::invalid_argument("noise_variance: must be > 0");
}

double angle_from_normal(const ArraySpec& array, Position2D target) {
    const Vec2 d = target - array.origin;
    if (d.norm() < 1e-12) {
        throw std::invalid_argument("target coincides with array origin");
    }
    return std::atan2(cross(array.normal, d), dot(array.normal, d));
}

bool in_field(const RadarPairConfig& pair, Position2D target) {
    const Vec2 dt = target - pair.tx.origin;
    const Vec2 dr = target - pair.rx.origin;
    if (dt.norm() < 1e-12 || dr.norm() < 1e-12) return false;
    return std::abs(angle_from_normal(pair.tx, target)) < kPi / 2.0 &&
           std::abs(angle_from_normal(pair.rx, target)) < kPi / 2.0;
}

AnglePair angles_for_target(const RadarPairConfig& pair, Position2D target) {
    const double aod = angle_from_normal(pair.tx, target);
    const double aoa = angle_from_normal(pair.rx, target);
    if (std::abs(aod) >= kPi / 2.0 || std::abs(aoa) >= kPi / 2.0) {
        throw std::domain_error("target out of field for pair " + std::to_string(pair.pair_id));
    }
    return {aod, aoa};
}

std::optional<AnglePair> try_angles_for_target(const RadarPairConfig& pair, Position2D target) {
    const Vec2 dt = target - pair.tx.origin;
    const Vec2 dr = target - pair.rx.origin;
    if (dt.norm() < 1e-12 || dr.norm() < 1e-12) return std::nullopt;
    const double aod = angle_from_normal(pair.tx, target);
    const double aoa = angle_from_normal(pair.rx, target);
    if (std::abs(aod) >= kPi / 2.0 || std::abs(aoa) >= kPi / 2.0) return std::nullopt;
    return AnglePair{aod, aoa};
}

Eigen::VectorXcd steering_vector(double angle_rad, int n_elements) {
    if (n_elements < 1) throw std::invalid_argument("steering_vector: n_elements must be >= 1");
    Eigen::VectorXcd v(n_elements);
    const double s = std::sin(angle_rad);
    for (int m = 0; m < n_elements; ++m) {
        v(m) = std::polar(1.0, kPi * m * s);
    }
    return v;
}

Eigen::VectorXcd joint_steering_vector(const AnglePair& angles, const RadarPairConfig& pair) {
    const Eigen::VectorXcd vt = steering_vector(angles.aod, pair.tx.elements);
    const Eigen::VectorXcd vr = steering_vector(angles.aoa, pair.rx.elements);
    const int n = pair.rx.elements;
    Eigen::VectorXcd a(pair.joint_dim());
    for (int m = 0; m < pair.tx.elements; ++m) {
        a.segment(m * n, n) = vt(m) * vr;
    }
    return a;
}

Eigen::MatrixXcd steering_matrix(std::span<const AnglePair> angles, const RadarPairConfig& pair) {
    if (angles.empty()) throw std::invalid_argument("steering_matrix: need at least one angle pair");
    Eigen::MatrixXcd A(pair.joint_dim(), static_cast<Eigen::Index>(angles.size()));
    for (Eigen::Index k = 0; k < A.cols(); ++k) {
        A.col(k) = joint_steering_vector(angles[static_cast<std::size_t>(k)], pair);
    }
    return A;
}

}  // namespace mstatic
