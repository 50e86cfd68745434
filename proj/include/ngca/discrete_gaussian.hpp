#ifndef NGCA_DISCRETE_GAUSSIAN_HPP
#define NGCA_DISCRETE_GAUSSIAN_HPP

// The s-spaced discrete Gaussian G_{s,theta}: mass s * g(ns + theta) on the
// points ns + theta, g the standard normal density. Moments are plain sums
// over |ns + theta| <= cutoff; the measure is not normalized unless the
// rescaled flag is set.

#include "ngca/errors.hpp"
#include "ngca/hermite.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace ngca::dist {

struct DiscreteGaussianSpec {
    double s = 1.0;
    double theta = 0.0;
    double cutoff = 10.0;
};

inline void validate(const DiscreteGaussianSpec& spec) {
    if (!(spec.s > 0.0)) throw ContractViolation("DiscreteGaussianSpec: spacing must be positive");
    if (!std::isfinite(spec.theta)) throw ContractViolation("DiscreteGaussianSpec: offset must be finite");
    if (!(spec.cutoff >= 8.0)) throw ContractViolation("DiscreteGaussianSpec: cutoff must be at least 8");
}

/// sum over |ns + theta| <= cutoff of (ns + theta)^k s g(ns + theta), divided
/// by the total measure when `rescaled`. Real may be a multiprecision type.
template <class Real = double>
Real discrete_gaussian_moment(const DiscreteGaussianSpec& spec, int k, bool rescaled) {
    validate(spec);
    if (k < 0) throw ContractViolation("discrete_gaussian_moment: negative order");
    using std::exp;
    using std::pow;
    using std::sqrt;
    const Real s(spec.s), theta(spec.theta);
    const Real inv_sqrt_2pi = 1 / sqrt(2 * boost::math::constants::pi<Real>());
    const long long lo = static_cast<long long>(std::ceil((-spec.cutoff - spec.theta) / spec.s));
    const long long hi = static_cast<long long>(std::floor((spec.cutoff - spec.theta) / spec.s));
    Real moment(0), mass(0);
    for (long long n = lo; n <= hi; ++n) {
        const Real x = Real(n) * s + theta;
        const Real w = s * inv_sqrt_2pi * exp(-x * x / 2);
        mass += w;
        moment += (k == 0 ? Real(1) : Real(pow(x, k))) * w;
    }
    if (rescaled) return moment / mass;
    return moment;
}

/// Signed quantity held as sign * 10^log10_abs, so that deviations far
/// below the double range still compare.
struct LogMagnitude {
    double log10_abs = -std::numeric_limits<double>::infinity();
    int sign = 0;

    double value() const { return sign == 0 ? 0.0 : sign * std::pow(10.0, log10_abs); }
    bool is_zero() const { return sign == 0; }
};

/// Deviation of the rescaled moment of the untruncated G_{s,theta} from the
/// Gaussian moment (k-1)!! 1[k even], by Poisson summation:
///   sum_n s f(ns + theta) = sum_j fhat(j/s) e^{2 pi i j theta / s}.
/// For f = x^k g, fhat(xi) = (-i)^k He_k(w) e^{-w^2/2} with w = 2 pi xi, so
///   raw_k - m_k = sum_{j>=1} 2 e^{-w_j^2/2} He_k(w_j) t_j,
///   t_j = (-1)^{k/2} cos(phi_j) for even k, (-1)^{(k-1)/2} sin(phi_j) for odd k,
/// with w_j = 2 pi j / s and phi_j = 2 pi j theta / s. The rescaled deviation is
/// (D_k - m_k D_0) / (1 + D_0). Terms are summed relative to the largest
/// exponent, so results far below 1e-308 keep their magnitude.
inline LogMagnitude discrete_gaussian_deviation(const DiscreteGaussianSpec& spec, int k) {
    if (!(spec.s > 0.0)) throw ContractViolation("discrete_gaussian_deviation: spacing must be positive");
    if (k < 0 || k > 64) throw ContractViolation("discrete_gaussian_deviation: order must be in [0, 64]");
    const double mk = hermite::gaussian_moment(k);

    struct Term {
        double log_abs;  // natural log of |term|
        double sign;
    };
    // Trig factor of the j-th dual term; offsets on a symmetric lattice give
    // exact zeros for the sine and exact +-1 for the cosine.
    auto trig = [&](long long j, bool even) {
        const double r = static_cast<double>(j) * spec.theta / spec.s;
        const double frac = r - std::floor(r);
        const double tol = 1e-12;
        if (frac < tol || frac > 1.0 - tol) return even ? 1.0 : 0.0;
        if (std::abs(frac - 0.5) < tol) return even ? -1.0 : 0.0;
        const double phi = 2.0 * std::numbers::pi * frac;
        return even ? std::cos(phi) : std::sin(phi);
    };
    auto dual_terms = [&](int order) {
        std::vector<Term> out;
        const bool even = order % 2 == 0;
        const double parity = even ? ((order / 2) % 2 == 0 ? 1.0 : -1.0) : (((order - 1) / 2) % 2 == 0 ? 1.0 : -1.0);
        const double first = 2.0 * std::numbers::pi / spec.s;
        for (long long j = 1;; ++j) {
            const double w = first * static_cast<double>(j);
            const double gauss_log = -0.5 * w * w;
            if (j > 1 && gauss_log < -0.5 * first * first - 200.0) break;
            const double t = trig(j, even);
            const double he = hermite::he_eval(order, w);
            if (t == 0.0 || he == 0.0) continue;
            out.push_back({gauss_log + std::log(2.0 * std::abs(he * t)), parity * (he * t > 0 ? 1.0 : -1.0)});
            if (j > 100000) break;
        }
        return out;
    };
    const auto dk = dual_terms(k);
    const auto d0 = dual_terms(0);
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& t : dk) top = std::max(top, t.log_abs);
    for (const auto& t : d0) top = std::max(top, t.log_abs);
    if (!std::isfinite(top)) return {};
    // D_k and D_0 in units of e^top.
    double sk = 0.0, s0 = 0.0;
    for (const auto& t : dk) sk += t.sign * std::exp(t.log_abs - top);
    for (const auto& t : d0) s0 += t.sign * std::exp(t.log_abs - top);
    const double numer = sk - mk * s0;
    if (numer == 0.0) return {};
    const double d0_value = top < 700.0 ? s0 * std::exp(top) : std::numeric_limits<double>::infinity();
    const double log_abs = top + std::log(std::abs(numer)) - std::log1p(d0_value);
    return {log_abs / std::numbers::ln10, numer > 0 ? 1 : -1};
}

}  // namespace ngca::dist

#endif  // NGCA_DISCRETE_GAUSSIAN_HPP
