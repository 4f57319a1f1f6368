#include "mstatic/subspace.hpp"

#include <cassert>
#include <stdexcept>

namespace mstatic {

CovarianceSet sample_covariance(const ChannelObservation& obs, const RadarPairConfig& pair) {
    if (obs.h.rows() != pair.subcarriers || obs.h.cols() != pair.joint_dim()) {
        throw std::invalid_argument("sample_covariance: observation does not match pair config");
    }
    CovarianceSet cov;
    cov.pair_id = obs.pair_id;
    cov.subcarriers = pair.subcarriers;
    cov.noise_variance = pair.noise_variance;
    // rows of h are h_q^T, so sum_q h_q h_q^H = H^T conj(H)
    Eigen::MatrixXcd R = (obs.h.transpose() * obs.h.conjugate()) / double(pair.subcarriers);
    cov.R = 0.5 * (R + R.adjoint().eval());
    return cov;
}

SubspaceDecomposition decompose(const CovarianceSet& cov, int num_targets) {
    const Eigen::Index dim = cov.R.rows();
    if (num_targets < 1 || num_targets >= dim) {
        throw std::invalid_argument("decompose: model order must satisfy 1 <= K < M*N");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov.R);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("decompose: eigendecomposition failed");
    }
    // Eigen returns ascending eigenvalues; flip to descending.
    SubspaceDecomposition dec;
    dec.eigenvalues = es.eigenvalues().reverse();
    Eigen::MatrixXcd vectors = es.eigenvectors().rowwise().reverse();
    dec.signal_basis = vectors.leftCols(num_targets);
    dec.noise_basis = vectors.rightCols(dim - num_targets);
    Eigen::MatrixXcd gamma = dec.signal_basis * dec.signal_basis.adjoint();
    dec.projector = 0.5 * (gamma + gamma.adjoint().eval());
    return dec;
}

double music_value(const Eigen::MatrixXcd& projector, const Eigen::VectorXcd& a) {
    if (projector.rows() != a.size() || projector.cols() != a.size()) {
        throw std::invalid_argument("music_value: dimension mismatch");
    }
    const std::complex<double> v = a.dot(projector * a);  // Eigen dot conjugates the left side
    assert(std::abs(v.imag()) <= 1e-9 * std::max(1.0, std::abs(v.real())));
    return v.real();
}

namespace {

Eigen::MatrixXcd gram(const Eigen::MatrixXcd& A) {
    Eigen::MatrixXcd G = A.adjoint() * A;
    return 0.5 * (G + G.adjoint().eval());
}

}  // namespace

Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& A) {
    const Eigen::MatrixXcd G = gram(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
        throw std::runtime_error("pseudo_inverse: steering matrix is rank deficient");
    }
    return G.inverse() * A.adjoint();
}

Eigen::MatrixXcd regularized_pseudo_inverse(const Eigen::MatrixXcd& A) {
    Eigen::MatrixXcd G = gram(A);
    const double eps = 1e-8 * G.real().trace() / double(A.cols());
    if (!(eps > 0.0)) {
        throw std::runtime_error("regularized_pseudo_inverse: zero steering matrix");
    }
    G.diagonal().array() += eps;
    return G.inverse() * A.adjoint();
}

namespace {

Eigen::MatrixXcd coeff_cov_from(const Eigen::MatrixXcd& pinv, const CovarianceSet& cov) {
    Eigen::MatrixXcd S = pinv * cov.R * pinv.adjoint();
    return 0.5 * (S + S.adjoint().eval());
}

}  // namespace

Eigen::MatrixXcd coefficient_covariance(const Eigen::MatrixXcd& steering_at_estimates,
                                        const CovarianceSet& cov) {
    if (steering_at_estimates.rows() != cov.R.rows()) {
        throw std::invalid_argument("coefficient_covariance: dimension mismatch");
    }
    return coeff_cov_from(pseudo_inverse(steering_at_estimates), cov);
}

Eigen::MatrixXcd regularized_coefficient_covariance(const Eigen::MatrixXcd& steering_at_estimates,
                                                    const CovarianceSet& cov) {
    if (steering_at_estimates.rows() != cov.R.rows()) {
        throw std::invalid_argument("coefficient_covariance: dimension mismatch");
    }
    return coeff_cov_from(regularized_pseudo_inverse(steering_at_estimates), cov);
}

double diagonality(const Eigen::MatrixXcd& coeff_cov) {
    const Eigen::Index k = coeff_cov.rows();
    if (k != coeff_cov.cols()) throw std::invalid_argument("diagonality: matrix must be square");
    if (k == 1) return 1.0;
    const double total = coeff_cov.cwiseAbs2().sum();
    if (!(total > 0.0)) throw std::invalid_argument("diagonality: matrix must be nonzero");
    const double diag = coeff_cov.diagonal().cwiseAbs2().sum();
    const double d = diag / total;
    const double inv_k = 1.0 / double(k);
    const double zeta = (d - inv_k) / (1.0 - inv_k);
    return std::clamp(zeta, 0.0, 1.0);
}

}  // namespace mstatic
