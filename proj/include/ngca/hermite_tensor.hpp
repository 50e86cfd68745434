#ifndef NGCA_HERMITE_TENSOR_HPP
#define NGCA_HERMITE_TENSOR_HPP

// Dense order-k tensors over R^m and the normalized Hermite tensor H_k(x).
//
// Storage is row-major over the k-tuple (i_1, ..., i_k), each index in [0, m).
// Entries of H_k(x) are computed from the per-coordinate multiplicities c_j of
// the tuple:  H_k(x)_{i_1..i_k} = prod_j He_{c_j}(x_j) / sqrt(k!).  This equals
// the signed sum over partitions of [k] into singletons and pairs, because a
// pair contributes -delta(i_a, i_b) and therefore only pairs indices that name
// the same coordinate, and the matchings of c points generate He_c.

#include "ngca/errors.hpp"
#include "ngca/hermite.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ngca::hermite {

inline constexpr std::size_t kTensorEntryBudget = 10'000'000;

/// m^k, or 0 when it exceeds `cap`.
inline std::size_t checked_power(std::size_t m, std::size_t k, std::size_t cap = kTensorEntryBudget) {
    std::size_t v = 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (m != 0 && v > cap / m) return 0;
        v *= m;
    }
    return v;
}

class HermiteTensor {
public:
    HermiteTensor(std::size_t dim, std::size_t order) : dim_(dim), order_(order) {
        if (dim == 0) throw ContractViolation("HermiteTensor: dimension must be positive");
        const std::size_t n = checked_power(dim, order);
        if (n == 0) throw ResourceError("HermiteTensor: m^k exceeds the dense storage budget of 1e7 entries");
        data_.assign(n, 0.0);
    }

    std::size_t dim() const { return dim_; }
    std::size_t order() const { return order_; }
    std::size_t size() const { return data_.size(); }
    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        if (idx.size() != order_) throw ContractViolation("HermiteTensor: index arity mismatch");
        std::size_t f = 0;
        for (std::size_t i : idx) {
            if (i >= dim_) throw ContractViolation("HermiteTensor: index out of range");
            f = f * dim_ + i;
        }
        return f;
    }
    double at(std::span<const std::size_t> idx) const { return data_[flat_index(idx)]; }

    /// Inverse of flat_index.
    std::vector<std::size_t> multi_index(std::size_t flat) const {
        std::vector<std::size_t> idx(order_);
        for (std::size_t p = order_; p-- > 0;) {
            idx[p] = flat % dim_;
            flat /= dim_;
        }
        return idx;
    }

private:
    std::size_t dim_;
    std::size_t order_;
    std::vector<double> data_;
};

inline HermiteTensor hermite_tensor(std::size_t m, std::size_t k, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (static_cast<std::size_t>(x.size()) != m) throw ContractViolation("hermite_tensor: x has wrong length");
    HermiteTensor t(m, k);
    // he[j][c] = He_c(x_j)
    std::vector<std::vector<double>> he(m, std::vector<double>(k + 1));
    for (std::size_t j = 0; j < m; ++j) {
        he[j][0] = 1.0;
        if (k >= 1) he[j][1] = x(j);
        for (std::size_t c = 1; c < k; ++c) he[j][c + 1] = x(j) * he[j][c] - static_cast<double>(c) * he[j][c - 1];
    }
    const double norm = std::exp(-0.5 * log_factorial(static_cast<int>(k)));
    std::vector<std::size_t> counts(m);
    for (std::size_t f = 0; f < t.size(); ++f) {
        std::fill(counts.begin(), counts.end(), 0);
        std::size_t rest = f;
        for (std::size_t p = 0; p < k; ++p) {
            ++counts[rest % m];
            rest /= m;
        }
        double v = norm;
        for (std::size_t j = 0; j < m; ++j) v *= he[j][counts[j]];
        t[f] = v;
    }
    return t;
}

/// u^{(x)k} scaled by c.
inline HermiteTensor outer_power(const Eigen::Ref<const Eigen::VectorXd>& u, std::size_t k, double c = 1.0) {
    const std::size_t m = static_cast<std::size_t>(u.size());
    HermiteTensor t(m, k);
    for (std::size_t f = 0; f < t.size(); ++f) {
        std::size_t rest = f;
        double v = c;
        for (std::size_t p = 0; p < k; ++p) {
            v *= u(static_cast<Eigen::Index>(rest % m));
            rest /= m;
        }
        t[f] = v;
    }
    return t;
}

/// Contracts every index of T (over n) with the rows of B (p x n), giving
/// B^{(x)k} T over p. No orthonormality requirement.
inline HermiteTensor contract_all(const Eigen::Ref<const Eigen::MatrixXd>& B, const HermiteTensor& T) {
    const std::size_t n = T.dim();
    const std::size_t p = static_cast<std::size_t>(B.rows());
    if (static_cast<std::size_t>(B.cols()) != n) throw ContractViolation("contract_all: B columns must equal tensor dimension");
    const std::size_t k = T.order();
    if (checked_power(std::max(n, p), k) == 0) throw ResourceError("contract_all: intermediate exceeds storage budget");
    // Mode products one index at a time; shape (pre, dim_mode, post).
    std::vector<double> cur(T.data().begin(), T.data().end());
    std::vector<std::size_t> shape(k, n);
    for (std::size_t mode = 0; mode < k; ++mode) {
        std::size_t pre = 1, post = 1;
        for (std::size_t i = 0; i < mode; ++i) pre *= shape[i];
        for (std::size_t i = mode + 1; i < k; ++i) post *= shape[i];
        std::vector<double> next(pre * p * post, 0.0);
        for (std::size_t a = 0; a < pre; ++a)
            for (std::size_t l = 0; l < n; ++l) {
                const double* src = &cur[(a * n + l) * post];
                for (std::size_t r = 0; r < p; ++r) {
                    const double b = B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l));
                    if (b == 0.0) continue;
                    double* dst = &next[(a * p + r) * post];
                    for (std::size_t c = 0; c < post; ++c) dst[c] += b * src[c];
                }
            }
        cur = std::move(next);
        shape[mode] = p;
    }
    HermiteTensor out(p, k);
    std::copy(cur.begin(), cur.end(), out.data().begin());
    return out;
}

/// B^{(x)k} T for B (m x n) with orthonormal rows, B B^T = I_m to 1e-10.
inline HermiteTensor apply_linear(const Eigen::Ref<const Eigen::MatrixXd>& B, const HermiteTensor& T) {
    const Eigen::MatrixXd gram = B * B.transpose();
    const double dev = (gram - Eigen::MatrixXd::Identity(B.rows(), B.rows())).cwiseAbs().maxCoeff();
    if (!(dev <= 1e-10)) throw ContractViolation("apply_linear: rows of B are not orthonormal");
    return contract_all(B, T);
}

inline double tensor_inner(const HermiteTensor& S, const HermiteTensor& T) {
    if (S.dim() != T.dim() || S.order() != T.order()) throw ContractViolation("tensor_inner: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) acc += S[i] * T[i];
    return acc;
}

inline double tensor_norm(const HermiteTensor& T) { return std::sqrt(tensor_inner(T, T)); }

/// max over entries and adjacent transpositions of |T_i - T_{sigma i}|,
/// relative to max|T| (0 for the zero tensor).
inline double max_asymmetry(const HermiteTensor& T) {
    double scale = 0.0;
    for (double v : T.data()) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || T.order() < 2) return 0.0;
    double worst = 0.0;
    for (std::size_t f = 0; f < T.size(); ++f) {
        auto idx = T.multi_index(f);
        for (std::size_t p = 0; p + 1 < idx.size(); ++p) {
            std::swap(idx[p], idx[p + 1]);
            worst = std::max(worst, std::abs(T[f] - T.at(idx)));
            std::swap(idx[p], idx[p + 1]);
        }
    }
    return worst / scale;
}

}  // namespace ngca::hermite

#endif  // NGCA_HERMITE_TENSOR_HPP
