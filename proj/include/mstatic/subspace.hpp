#pragma once

#include <Eigen/Dense>

#include "mstatic/channel.hpp"
#include "mstatic/geometry.hpp"

namespace mstatic {

/// Subcarrier-averaged sample covariance of one pair's estimated channel.
/// This is the only payload a radar pair has to ship to the central
/// processor, so it also carries the metadata the fusion weight needs.
struct CovarianceSet {
    int pair_id = 0;
    Eigen::MatrixXcd R;        // Hermitian, (M_p N_p) x (M_p N_p)
    int subcarriers = 1;       // Q_p
    double noise_variance = 1.0;
};

/// Eigenstructure of a sample covariance split at model order K.
struct SubspaceDecomposition {
    Eigen::MatrixXcd signal_basis;  // U, MN x K, orthonormal columns
    Eigen::MatrixXcd noise_basis;   // G, MN x (MN - K)
    Eigen::MatrixXcd projector;     // Gamma = U U^H = I - G G^H
    Eigen::VectorXd eigenvalues;    // descending
};

/// R = (1/Q) sum_q h_q h_q^H, symmetrized. sigma2 and Q are carried through
/// from the pair config.
CovarianceSet sample_covariance(const ChannelObservation& obs, const RadarPairConfig& pair);

/// Splits the top-K eigenspace (signal) from the rest (noise).
/// Throws std::invalid_argument when K >= MN.
SubspaceDecomposition decompose(const CovarianceSet& cov, int num_targets);

/// MUSIC pseudo-spectrum value a^H Gamma a (real part; the imaginary residue
/// of the quadratic form is numerical noise).
double music_value(const Eigen::MatrixXcd& projector, const Eigen::VectorXcd& a);

/// Moore-Penrose inverse (A^H A)^{-1} A^H for a full-column-rank A.
/// Throws std::runtime_error when cond(A^H A) exceeds 1e12.
Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& A);

/// Tikhonov-regularized variant, (A^H A + eps I)^{-1} A^H with
/// eps = 1e-8 trace(A^H A) / K. For callers that must survive coincident
/// tested angles (oracle grid search, degenerate pre-estimates).
Eigen::MatrixXcd regularized_pseudo_inverse(const Eigen::MatrixXcd& A);

/// Estimated coefficient covariance S^ = A+ R A+^H (K x K, Hermitian).
/// Propagates the pseudo_inverse singularity error.
Eigen::MatrixXcd coefficient_covariance(const Eigen::MatrixXcd& steering_at_estimates,
                                        const CovarianceSet& cov);

/// Same, built on the regularized pseudo-inverse.
Eigen::MatrixXcd regularized_coefficient_covariance(const Eigen::MatrixXcd& steering_at_estimates,
                                                    const CovarianceSet& cov);

/// Diagonality criterion in [0, 1]: 1 for a diagonal matrix, 0 when the
/// squared mass is spread evenly over all entries.
/// zeta = (d - 1/K) / (1 - 1/K) with d = sum|S_kk|^2 / sum|S_ij|^2.
/// K = 1 returns 1 by convention; requires ||S||_F > 0 otherwise.
double diagonality(const Eigen::MatrixXcd& coeff_cov);

}  // namespace mstatic
