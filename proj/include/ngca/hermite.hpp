#ifndef NGCA_HERMITE_HPP
#define NGCA_HERMITE_HPP

// Probabilists' Hermite polynomials He_k, the normalized family
// h_k = He_k / sqrt(k!), and a small univariate polynomial type that can
// move between the monomial, Hermite and Legendre-on-[-C, C] bases.

#include "ngca/errors.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ngca::hermite {

/// He_k(t) by He_{k+1} = t He_k - k He_{k-1}. Forward recurrence is stable
/// for the dominant solution; relative error grows roughly linearly in k.
/// Past k ~ 170 the values themselves overflow for |t| >~ 1 (returns +-inf).
inline double he_eval(int k, double t) {
    if (k < 0) throw ContractViolation("he_eval: negative order");
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = t;
    for (int j = 1; j < k; ++j) {
        const double next = t * cur - j * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// h_k(t) = He_k(t)/sqrt(k!), evaluated by the normalized recurrence
/// sqrt(k+1) h_{k+1} = t h_k - sqrt(k) h_{k-1}; no factorial overflow.
inline double h_eval(int k, double t) {
    if (k < 0) throw ContractViolation("h_eval: negative order");
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = t;
    for (int j = 1; j < k; ++j) {
        const double next = (t * cur - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(j + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

/// h_0(t), ..., h_k(t) in one pass.
inline std::vector<double> h_all(int k, double t) {
    std::vector<double> out(static_cast<std::size_t>(k) + 1);
    out[0] = 1.0;
    if (k >= 1) out[1] = t;
    for (int j = 1; j < k; ++j)
        out[j + 1] = (t * out[j] - std::sqrt(static_cast<double>(j)) * out[j - 1]) / std::sqrt(j + 1.0);
    return out;
}

/// Monomial coefficients of He_k (index = power). Exact integers up to k = 30.
inline std::vector<double> he_monomial_coefficients(int k) {
    std::vector<long double> prev{1.0L};
    if (k == 0) return {1.0};
    std::vector<long double> cur{0.0L, 1.0L};
    for (int j = 1; j < k; ++j) {
        std::vector<long double> next(cur.size() + 1, 0.0L);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= j * prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return {cur.begin(), cur.end()};
}

inline double log_factorial(int k) { return std::lgamma(k + 1.0); }

/// (k-1)!! for even k, 0 for odd k: the k-th raw moment of N(0, 1).
inline double gaussian_moment(int k) {
    if (k < 0) throw ContractViolation("gaussian_moment: negative order");
    if (k % 2 == 1) return 0.0;
    double v = 1.0;
    for (int j = k - 1; j > 1; j -= 2) v *= j;
    return v;
}

enum class Basis { monomial, hermite, legendre };

inline std::string to_string(Basis b) {
    switch (b) {
        case Basis::monomial: return "monomial";
        case Basis::hermite: return "probabilist-hermite";
        case Basis::legendre: return "legendre";
    }
    return "?";
}

/// Real polynomial in one of three bases. `hermite` means the He_k basis;
/// `legendre` means P_j(x / C) on [-C, C].
///
/// Besides the double coefficients used for evaluation, each polynomial keeps
/// 50-digit copies that basis conversions read and write. Converting between
/// the monomial and Hermite bases amplifies coefficient rounding by ~1e12 at
/// degree 20, so the double coefficients of a converted polynomial are the
/// correctly rounded values of the exact conversion instead.
class Polynomial1D {
public:
    using Wide = boost::multiprecision::cpp_bin_float_50;

    Polynomial1D() : coeffs_{0.0}, wide_{Wide(0)} {}

    static Polynomial1D monomial(std::vector<double> c) { return {Basis::monomial, std::move(c), 0.0}; }
    static Polynomial1D hermite(std::vector<double> c) { return {Basis::hermite, std::move(c), 0.0}; }
    static Polynomial1D legendre(std::vector<double> c, double half_width) {
        if (!(half_width > 0.0)) throw ContractViolation("Polynomial1D: legendre half-width must be positive");
        return {Basis::legendre, std::move(c), half_width};
    }

    Basis basis() const { return basis_; }
    std::span<const double> coeffs() const { return coeffs_; }
    double half_width() const { return half_width_; }
    int degree() const {
        for (int i = static_cast<int>(coeffs_.size()) - 1; i > 0; --i)
            if (coeffs_[i] != 0.0) return i;
        return 0;
    }

    double operator()(double x) const {
        switch (basis_) {
            case Basis::monomial: {
                double acc = 0.0;
                for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
                return acc;
            }
            case Basis::hermite: {
                double prev = 1.0, cur = x, acc = coeffs_[0];
                if (coeffs_.size() > 1) acc += coeffs_[1] * x;
                for (std::size_t j = 1; j + 1 < coeffs_.size(); ++j) {
                    const double next = x * cur - static_cast<double>(j) * prev;
                    prev = cur;
                    cur = next;
                    acc += coeffs_[j + 1] * cur;
                }
                return acc;
            }
            case Basis::legendre: {
                const double y = x / half_width_;
                double prev = 1.0, cur = y, acc = coeffs_[0];
                if (coeffs_.size() > 1) acc += coeffs_[1] * y;
                for (std::size_t j = 1; j + 1 < coeffs_.size(); ++j) {
                    const double jj = static_cast<double>(j);
                    const double next = ((2.0 * jj + 1.0) * y * cur - jj * prev) / (jj + 1.0);
                    prev = cur;
                    cur = next;
                    acc += coeffs_[j + 1] * cur;
                }
                return acc;
            }
        }
        return 0.0;
    }

    Polynomial1D to_monomial() const {
        const std::size_t n = wide_.size();
        std::vector<Wide> out(n, Wide(0));
        switch (basis_) {
            case Basis::monomial: return *this;
            case Basis::hermite: {
                // Accumulate He_j's monomial expansion on the fly.
                std::vector<Wide> prev{Wide(1)}, cur{Wide(0), Wide(1)};
                out[0] += wide_[0];
                if (n > 1) out[1] += wide_[1];
                for (std::size_t j = 1; j + 1 < n; ++j) {
                    std::vector<Wide> next(cur.size() + 1, Wide(0));
                    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
                    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= Wide(j) * prev[i];
                    for (std::size_t i = 0; i < next.size(); ++i) out[i] += wide_[j + 1] * next[i];
                    prev = std::move(cur);
                    cur = std::move(next);
                }
                break;
            }
            case Basis::legendre: {
                std::vector<Wide> prev{Wide(1)}, cur{Wide(0), Wide(1)};
                out[0] += wide_[0];
                if (n > 1) out[1] += wide_[1];
                for (std::size_t j = 1; j + 1 < n; ++j) {
                    const Wide jj(j);
                    std::vector<Wide> next(cur.size() + 1, Wide(0));
                    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += (2 * jj + 1) * cur[i] / (jj + 1);
                    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= jj * prev[i] / (jj + 1);
                    for (std::size_t i = 0; i < next.size(); ++i) out[i] += wide_[j + 1] * next[i];
                    prev = std::move(cur);
                    cur = std::move(next);
                }
                Wide scale(1);
                for (std::size_t i = 0; i < n; ++i) {
                    out[i] /= scale;
                    scale *= Wide(half_width_);
                }
                break;
            }
        }
        return {Basis::monomial, std::move(out), 0.0};
    }

    Polynomial1D to_hermite() const {
        if (basis_ == Basis::hermite) return *this;
        const auto mono = to_monomial();
        // x^n in the He basis via x He_l = He_{l+1} + l He_{l-1}.
        const std::size_t n = mono.wide_.size();
        std::vector<Wide> out(n, Wide(0)), power{Wide(1)};
        for (std::size_t p = 0; p < n; ++p) {
            if (p > 0) {
                std::vector<Wide> next(power.size() + 1, Wide(0));
                for (std::size_t l = 0; l < power.size(); ++l) {
                    next[l + 1] += power[l];
                    if (l > 0) next[l - 1] += Wide(l) * power[l];
                }
                power = std::move(next);
            }
            for (std::size_t l = 0; l < power.size(); ++l) out[l] += mono.wide_[p] * power[l];
        }
        return {Basis::hermite, std::move(out), 0.0};
    }

    Polynomial1D to_legendre(double half_width) const {
        if (!(half_width > 0.0)) throw ContractViolation("Polynomial1D: legendre half-width must be positive");
        if (basis_ == Basis::legendre && half_width == half_width_) return *this;
        const auto mono = to_monomial();
        // y^n in the Legendre basis via y P_l = ((l+1) P_{l+1} + l P_{l-1}) / (2l+1).
        const std::size_t n = mono.wide_.size();
        std::vector<Wide> out(n, Wide(0)), power{Wide(1)};
        Wide scale(1);
        for (std::size_t p = 0; p < n; ++p) {
            if (p > 0) {
                std::vector<Wide> next(power.size() + 1, Wide(0));
                for (std::size_t l = 0; l < power.size(); ++l) {
                    const Wide ll(l);
                    next[l + 1] += (ll + 1) * power[l] / (2 * ll + 1);
                    if (l > 0) next[l - 1] += ll * power[l] / (2 * ll + 1);
                }
                power = std::move(next);
                scale *= Wide(half_width);
            }
            for (std::size_t l = 0; l < power.size(); ++l) out[l] += mono.wide_[p] * scale * power[l];
        }
        return {Basis::legendre, std::move(out), half_width};
    }

private:
    Polynomial1D(Basis b, std::vector<double> c, double hw) : basis_(b), coeffs_(std::move(c)), half_width_(hw) {
        if (coeffs_.empty()) coeffs_.push_back(0.0);
        for (double v : coeffs_)
            if (!std::isfinite(v)) throw ContractViolation("Polynomial1D: non-finite coefficient");
        wide_.assign(coeffs_.begin(), coeffs_.end());
    }
    Polynomial1D(Basis b, std::vector<Wide> w, double hw) : basis_(b), wide_(std::move(w)), half_width_(hw) {
        if (wide_.empty()) wide_.push_back(Wide(0));
        coeffs_.reserve(wide_.size());
        for (const auto& v : wide_) coeffs_.push_back(v.convert_to<double>());
        for (double v : coeffs_)
            if (!std::isfinite(v)) throw ContractViolation("Polynomial1D: non-finite coefficient");
    }

    Basis basis_ = Basis::monomial;
    std::vector<double> coeffs_;
    std::vector<Wide> wide_;
    double half_width_ = 0.0;
};

}  // namespace ngca::hermite

#endif  // NGCA_HERMITE_HPP
