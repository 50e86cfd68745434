#ifndef NGCA_FRAME_HPP
#define NGCA_FRAME_HPP

#include "ngca/errors.hpp"
#include "ngca/rng.hpp"

#include <Eigen/Dense>

#include <random>

namespace ngca::subspace {

/// n x m matrix with orthonormal columns.
class OrthonormalFrame {
public:
    explicit OrthonormalFrame(Eigen::MatrixXd v) : v_(std::move(v)) {
        if (v_.cols() < 1 || v_.rows() < v_.cols())
            throw ContractViolation("OrthonormalFrame: need n >= m >= 1");
        if (!(orthonormality_defect() <= 1e-10))
            throw ContractViolation("OrthonormalFrame: columns are not orthonormal");
    }

    /// Unit vector as an n x 1 frame.
    static OrthonormalFrame from_direction(const Eigen::VectorXd& v) {
        Eigen::MatrixXd m(v.size(), 1);
        m.col(0) = v / v.norm();
        return OrthonormalFrame(std::move(m));
    }

    Eigen::Index n() const { return v_.rows(); }
    Eigen::Index m() const { return v_.cols(); }
    const Eigen::MatrixXd& matrix() const { return v_; }

    double orthonormality_defect() const {
        return (v_.transpose() * v_ - Eigen::MatrixXd::Identity(v_.cols(), v_.cols())).cwiseAbs().maxCoeff();
    }

private:
    Eigen::MatrixXd v_;
};

/// Haar-distributed frame: QR of an n x m standard Gaussian matrix with the
/// signs of Q's columns fixed so that R has a positive diagonal. Without the
/// sign fix the law of Q depends on the QR implementation's conventions.
template <class Urbg>
OrthonormalFrame sample_frame(Eigen::Index n, Eigen::Index m, Urbg& rng) {
    if (!(m >= 1 && m < n)) throw ContractViolation("sample_frame: need 1 <= m < n");
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd g(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    const Eigen::MatrixXd& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < m; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return OrthonormalFrame(std::move(q));
}

}  // namespace ngca::subspace

#endif  // NGCA_FRAME_HPP
