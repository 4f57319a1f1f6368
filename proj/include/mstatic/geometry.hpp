#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace mstatic {

inline constexpr double kPi = 3.14159265358979323846;

/// 2D vector / position in meters.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr bool operator==(const Vec2&) const = default;

    double norm() const { return std::hypot(x, y); }
};

using Position2D = Vec2;

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// Scalar 2D cross product; positive when b is counter-clockwise of a.
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Uniform linear array: half-wavelength element spacing along the direction
/// perpendicular to `normal`, element 0 at `origin` (the phase reference).
struct ArraySpec {
    Position2D origin;
    Vec2 normal{0.0, 1.0};  // unit vector pointing into the coverage area
    int elements = 1;

    void validate() const;  // throws std::invalid_argument
};

/// One STx-SRx radar pair. Monostatic when the two origins coincide.
struct RadarPairConfig {
    int pair_id = 0;
    ArraySpec tx;                        // M_p elements
    ArraySpec rx;                        // N_p elements
    int subcarriers = 1;                 // Q_p
    double subcarrier_spacing_hz = 312.5e3;
    double carrier_freq_hz = 5.89e9;
    double noise_variance = 1.0;         // total variance per complex channel entry

    int joint_dim() const { return tx.elements * rx.elements; }
    bool monostatic() const { return tx.origin == rx.origin; }
    void validate() const;
};

/// AoD/AoA in radians, measured from the owning array's normal.
/// Sign convention (used everywhere): positive = counter-clockwise of the normal.
struct AnglePair {
    double aod = 0.0;
    double aoa = 0.0;
};

/// Signed angle between (target - origin) and the array normal, in (-pi, pi].
double angle_from_normal(const ArraySpec& array, Position2D target);

/// True when the target sits strictly inside the front half-planes of both arrays.
bool in_field(const RadarPairConfig& pair, Position2D target);

/// AoD at the tx array and AoA at the rx array for one target.
/// Throws std::domain_error when the target is out of field (|angle| >= pi/2)
/// and std::invalid_argument when it coincides with an array origin.
AnglePair angles_for_target(const RadarPairConfig& pair, Position2D target);

/// Non-throwing variant used by grid evaluation; empty when out of field.
std::optional<AnglePair> try_angles_for_target(const RadarPairConfig& pair, Position2D target);

/// ULA response [1, e^{j pi sin a}, ..., e^{j pi (n-1) sin a}].
Eigen::VectorXcd steering_vector(double angle_rad, int n_elements);

/// Joint AoD/AoA response: Kronecker product of the tx and rx steering
/// vectors. Element (m, n) sits at index m * N_p + n; element 0 is 1.
Eigen::VectorXcd joint_steering_vector(const AnglePair& angles, const RadarPairConfig& pair);

/// Column k is the joint steering vector of angle set k. Size (M_p N_p) x K.
Eigen::MatrixXcd steering_matrix(std::span<const AnglePair> angles, const RadarPairConfig& pair);

}  // namespace mstatic
