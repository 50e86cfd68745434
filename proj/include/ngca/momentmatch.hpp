#ifndef NGCA_MOMENTMATCH_HPP
#define NGCA_MOMENTMATCH_HPP

// Moment-matching constructions: a polynomial correction p on [-C, C] with
// prescribed moments int p(x) x^t dx = a_t, t = 0..d, and the laws built
// from it.

#include "ngca/errors.hpp"
#include "ngca/hermite.hpp"
#include "ngca/quadrature.hpp"
#include "ngca/univariate.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <vector>

namespace ngca::momentmatch {

using dist::Univariate;
using hermite::Polynomial1D;

struct MomentTargets {
    double half_width = 1.0;
    int degree = 0;
    std::vector<double> a;  // a_0 .. a_d
};

struct SolveReport {
    Polynomial1D poly;      // monomial basis
    double residual = 0.0;  // max_t |int p x^t - a_t|
    double sup_p = 0.0;     // max |p| on [-C, C]
    double condition = 0.0; // worst 2-norm condition of the scaled parity blocks
};

namespace detail {

struct Extremum {
    double value;
    double location;
};

/// Minimum of f on [lo, hi]: a uniform grid followed by golden-section
/// refinement around every grid-local minimum.
inline Extremum minimize_on_interval(const std::function<double(double)>& f, double lo, double hi, int grid = 10000) {
    std::vector<double> vals(grid + 1);
    const double h = (hi - lo) / grid;
    for (int i = 0; i <= grid; ++i) vals[i] = f(lo + h * i);
    Extremum best{vals[0], lo};
    for (int i = 0; i <= grid; ++i)
        if (vals[i] < best.value) best = {vals[i], lo + h * i};
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 1; i < grid; ++i) {
        if (!(vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1])) continue;
        double a = lo + h * (i - 1), b = lo + h * (i + 1);
        double c = b - phi * (b - a), d = a + phi * (b - a);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < 60; ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
        }
        const double x = 0.5 * (a + b);
        const double v = f(x);
        if (v < best.value) best = {v, x};
    }
    return best;
}

/// int_{-1}^{1} P_j(y) y^t dy; exact via a 20-point Gauss-Legendre rule for t + j <= 39.
inline double legendre_moment(int j, int t) {
    if ((t + j) % 2 == 1 || j > t) return 0.0;
    const auto& rule = gauss_legendre(20);
    const auto pj = Polynomial1D::legendre([&] {
        std::vector<double> c(j + 1, 0.0);
        c[j] = 1.0;
        return c;
    }(), 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * pj(rule.nodes[i]) * std::pow(rule.nodes[i], t);
    return acc;
}

/// int_{-C}^{C} p(x) x^t dx for a monomial-basis p.
inline double patch_moment(const Polynomial1D& mono, double c, int t) {
    const auto coef = mono.coeffs();
    double acc = 0.0;
    for (std::size_t i = 0; i < coef.size(); ++i) {
        const std::size_t e = i + static_cast<std::size_t>(t);
        if (e % 2 == 1) continue;
        acc += coef[i] * 2.0 * std::pow(c, static_cast<double>(e + 1)) / static_cast<double>(e + 1);
    }
    return acc;
}

inline double sup_abs(const Polynomial1D& p, double c) {
    const auto m = minimize_on_interval([&](double x) { return -std::abs(p(x)); }, -c, c);
    return -m.value;
}

}  // namespace detail

/// Solves int_{-C}^{C} p(x) x^t dx = a_t for t = 0..d with deg p <= d.
///
/// Writing p = sum_j b_j P_j(x / C), the constraint matrix entry is
/// C^{t+1} int P_j(y) y^t dy. It vanishes unless t + j is even, so the system
/// splits into even and odd blocks; each row is scaled by C^{-(t+1)} before a
/// QR solve. `row_order`, if given, permutes the constraints (the solution is
/// unique, so the order only affects rounding).
inline SolveReport solve_correction(const MomentTargets& targets, const std::vector<int>& row_order = {}) {
    const int d = targets.degree;
    const double c = targets.half_width;
    if (d < 0 || d > 16) throw ContractViolation("solve_correction: degree must be in [0, 16]");
    if (!(c > 0.0)) throw ContractViolation("solve_correction: half-width must be positive");
    if (static_cast<int>(targets.a.size()) != d + 1) throw ContractViolation("solve_correction: need d + 1 targets");
    for (double v : targets.a)
        if (!std::isfinite(v)) throw ContractViolation("solve_correction: non-finite target");
    std::vector<int> order = row_order;
    if (order.empty()) {
        order.resize(d + 1);
        std::iota(order.begin(), order.end(), 0);
    }
    {
        auto sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i <= d; ++i)
            if (static_cast<int>(sorted.size()) != d + 1 || sorted[i] != i)
                throw ContractViolation("solve_correction: row_order must be a permutation of 0..d");
    }

    std::vector<double> legendre_coeffs(d + 1, 0.0);
    double worst_condition = 1.0;
    for (int parity = 0; parity < 2; ++parity) {
        std::vector<int> rows, cols;
        for (int t : order)
            if (t % 2 == parity) rows.push_back(t);
        for (int j = parity; j <= d; j += 2) cols.push_back(j);
        if (rows.empty()) continue;
        const auto size = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd g(size, size);
        Eigen::VectorXd rhs(size);
        for (Eigen::Index r = 0; r < size; ++r) {
            const int t = rows[r];
            for (Eigen::Index k = 0; k < size; ++k) g(r, k) = detail::legendre_moment(cols[k], t);
            rhs(r) = targets.a[t] / std::pow(c, t + 1);
        }
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
        const auto& sv = svd.singularValues();
        const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
        worst_condition = std::max(worst_condition, cond);
        if (!(cond <= 1e12)) {
            std::ostringstream msg;
            msg << "solve_correction: " << (parity ? "odd" : "even") << " block condition " << cond << " exceeds 1e12";
            throw IllConditionedError(msg.str(), cond);
        }
        const Eigen::VectorXd b = g.colPivHouseholderQr().solve(rhs);
        for (Eigen::Index k = 0; k < size; ++k) legendre_coeffs[cols[k]] = b(k);
    }

    SolveReport rep;
    rep.poly = Polynomial1D::legendre(legendre_coeffs, c).to_monomial();
    rep.condition = worst_condition;
    for (int t = 0; t <= d; ++t)
        rep.residual = std::max(rep.residual, std::abs(detail::patch_moment(rep.poly, c, t) - targets.a[t]));
    rep.sup_p = detail::sup_abs(rep.poly, c);
    return rep;
}

/// sqrt(sum_{k=1}^{d} A_k^2), A_k = E_A[h_k]: the largest |E_A f - E_N f| over
/// polynomials f of degree <= d with unit Gaussian L2 norm (attained at
/// f = sum_k A_k h_k / nu).
inline double verify_moment_match(const Univariate& a, int d) {
    if (d < 1 || d > 32) throw ContractViolation("verify_moment_match: d must be in [1, 32]");
    double s = 0.0;
    for (int k = 1; k <= d; ++k) {
        const double ak = dist::uni_hermite_coeff(a, k);
        s += ak * ak;
    }
    return std::sqrt(s);
}

struct Construction {
    Univariate law;
    SolveReport solve;
    double alpha = 0.0;  // ac / decodable
    double mu = 0.0;     // decodable
    double nu = 0.0;
    double min_density = 0.0;

    int degree = 0;

    nlohmann::json report_json() const {
        nlohmann::json j = {{"residual", solve.residual}, {"sup_p", solve.sup_p}, {"condition", solve.condition},
                            {"nu", nu}, {"min_density", min_density}};
        if (alpha > 0.0) j["alpha"] = alpha;
        if (mu != 0.0) {
            j["mu"] = mu;
            j["mu_alpha_scaling"] = mu * std::pow(alpha, 1.0 / degree);
        }
        return j;
    }
};

// -- the explicit instance (1-2eps) N + eps delta_B + eps delta_-B + p 1[-1,1] ---

namespace detail {

inline MomentTargets appendix_d_targets(double n, int d) {
    const double eps = std::pow(n, -(d + 2) / 2.0);
    MomentTargets t;
    t.half_width = 1.0;
    t.degree = d;
    t.a.assign(d + 1, 0.0);
    for (int k = 2; k <= d; k += 2) t.a[k] = 2.0 * eps * (hermite::gaussian_moment(k) - std::pow(n, k / 2.0));
    return t;
}

inline Univariate appendix_d_law(double n, int d, const Polynomial1D& p) {
    const double eps = std::pow(n, -(d + 2) / 2.0);
    const double b = std::sqrt(n);
    Univariate u;
    u.gaussians.push_back({0.0, 1.0, 1.0 - 2.0 * eps, dist::kInf});
    u.atoms.push_back({-b, eps});
    u.atoms.push_back({b, eps});
    u.patches.emplace_back(1.0, p);
    return u;
}

inline double continuous_min(const Univariate& u, double lo, double hi) {
    return minimize_on_interval([&](double x) { return u.continuous_density(x); }, lo, hi).value;
}

}  // namespace detail

/// eps = n^{-(d+2)/2}, B = sqrt(n), a_t = 2 eps ((t-1)!! - B^t) for even t,
/// 0 for odd t. Throws InfeasibleError (hint = smallest feasible n found by
/// doubling) when the density goes negative on [-1, 1].
inline Construction appendix_d_instance(double n, int d) {
    if (d < 2 || d % 2 != 0 || d > 16) throw ContractViolation("appendix_d_instance: d must be even in [2, 16]");
    if (!(n >= 1.0)) throw ContractViolation("appendix_d_instance: n must be positive");
    auto build = [d](double nn) {
        Construction c;
        c.solve = solve_correction(detail::appendix_d_targets(nn, d));
        c.law = detail::appendix_d_law(nn, d, c.solve.poly);
        c.min_density = detail::continuous_min(c.law, -1.0, 1.0);
        return c;
    };
    Construction c = build(n);
    if (!(c.min_density >= 0.0)) {
        double trial = n;
        double hint = std::numeric_limits<double>::quiet_NaN();
        for (int i = 0; i < 60; ++i) {
            trial *= 2.0;
            if (build(trial).min_density >= 0.0) {
                hint = trial;
                break;
            }
        }
        std::ostringstream msg;
        msg << "appendix_d_instance: density negative (min " << c.min_density << ") at n = " << n << ", d = " << d
            << "; smallest feasible n found by doubling: " << hint;
        throw InfeasibleError(msg.str(), hint);
    }
    c.nu = verify_moment_match(c.law, d);
    c.degree = d;
    return c;
}

// -- anti-concentration: alpha delta_0 + (1 - alpha) (N + p 1[-1,1]) --------------

namespace detail {

inline Construction ac_build(int d, double alpha) {
    const double r = alpha / (1.0 - alpha);
    Construction c;
    MomentTargets t;
    t.half_width = 1.0;
    t.degree = d;
    t.a.assign(d + 1, 0.0);
    for (int i = 1; i <= d; ++i) t.a[i] = r * hermite::gaussian_moment(i);
    c.solve = solve_correction(t);
    c.alpha = alpha;
    c.degree = d;
    Univariate e = Univariate::standard_normal();
    e.patches.emplace_back(1.0, c.solve.poly);
    c.law = dist::mixture({{alpha, Univariate::dirac(0.0)}, {1.0 - alpha, e}});
    c.min_density = continuous_min(c.law, -1.0, 1.0);
    return c;
}

}  // namespace detail

enum class AlphaMode { given, maximize };

/// In `given` mode, fails with InfeasibleError (hint = achieved sup|p|) when
/// sup|p| exceeds 1/10. In `maximize` mode, bisects alpha to within a
/// relative 1e-6 of the largest value meeting the bound; sup|p| grows linearly in
/// alpha / (1 - alpha), so feasibility is monotone.
inline Construction ac_instance(int d, AlphaMode mode, double alpha = 0.0) {
    if (d < 1 || d > 16) throw ContractViolation("ac_instance: d must be in [1, 16]");
    constexpr double kSupBound = 0.1;
    if (mode == AlphaMode::given) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ContractViolation("ac_instance: alpha must be in (0, 1)");
        auto c = detail::ac_build(d, alpha);
        if (c.solve.sup_p > kSupBound) {
            std::ostringstream msg;
            msg << "ac_instance: sup|p| = " << c.solve.sup_p << " exceeds 1/10 at alpha = " << alpha;
            throw InfeasibleError(msg.str(), c.solve.sup_p);
        }
        c.nu = verify_moment_match(c.law, d);
        return c;
    }
    // The optimum shrinks quickly with d (about 1e-7 at d = 10), so the
    // bracket is found by halving and the 1e-6 tolerance is relative.
    double hi = 1.0, lo = 0.5;
    while (detail::ac_build(d, lo).solve.sup_p > kSupBound) {
        hi = lo;
        lo *= 0.5;
        if (lo < 1e-300) throw InfeasibleError("ac_instance: no positive alpha meets the sup bound", 0.0);
    }
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (detail::ac_build(d, mid).solve.sup_p <= kSupBound)
            lo = mid;
        else
            hi = mid;
    }
    auto c = detail::ac_build(d, lo);
    c.nu = verify_moment_match(c.law, d);
    return c;
}

// -- list-decodable style: alpha N(mu, 1) + (1 - alpha) (N + p 1[-C, C]) ------------

namespace detail {

inline Construction decodable_build(int d, double alpha, double c, double mu) {
    const double r = alpha / (1.0 - alpha);
    const auto shifted = Univariate::normal(mu, 1.0);
    MomentTargets t;
    t.half_width = c;
    t.degree = d;
    t.a.assign(d + 1, 0.0);
    for (int i = 1; i <= d; ++i) t.a[i] = r * (hermite::gaussian_moment(i) - dist::uni_moment(shifted, i));
    Construction out;
    out.solve = solve_correction(t);
    out.alpha = alpha;
    out.mu = mu;
    out.degree = d;
    Univariate e = Univariate::standard_normal();
    e.patches.emplace_back(c, out.solve.poly);
    out.law = dist::mixture({{alpha, shifted}, {1.0 - alpha, e}});
    // Feasibility margin: min over [-C, C] of phi - |p| (needs >= 0 for 0 <= N + p <= 2N).
    out.min_density = minimize_on_interval([&](double x) { return normal_pdf(x) - std::abs(out.solve.poly(x)); }, -c, c).value;
    return out;
}

}  // namespace detail

/// Largest mu (scan in steps of 0.05 up to 50, then bisection to 1e-6) for
/// which the correction keeps 0 <= N + p <= 2N on [-C, C].
inline Construction decodable_instance(int d, double alpha, double c) {
    if (d < 1 || d > 16) throw ContractViolation("decodable_instance: d must be in [1, 16]");
    if (!(alpha > 0.0 && alpha < 0.5)) throw ContractViolation("decodable_instance: alpha must be in (0, 1/2)");
    if (!(c > 0.0)) throw ContractViolation("decodable_instance: half-width must be positive");
    auto feasible = [&](double mu) { return detail::decodable_build(d, alpha, c, mu).min_density >= 0.0; };
    double good = 0.0, bad = -1.0;
    for (double mu = 0.05; mu <= 50.0 + 1e-12; mu += 0.05) {
        if (feasible(mu)) {
            good = mu;
        } else {
            bad = mu;
            break;
        }
    }
    if (bad > 0.0)
        while (bad - good > 1e-6) {
            const double mid = 0.5 * (good + bad);
            (feasible(mid) ? good : bad) = mid;
        }
    if (good < 0.1) {
        std::ostringstream msg;
        msg << "decodable_instance: no feasible mu >= 0.1 (best " << good << ")";
        throw InfeasibleError(msg.str(), good);
    }
    auto out = detail::decodable_build(d, alpha, c, good);
    out.nu = verify_moment_match(out.law, d);
    return out;
}

/// The instance for a fixed mu (mu = 0 gives p = 0 and A = N).
inline Construction decodable_with_mu(int d, double alpha, double c, double mu) {
    auto out = detail::decodable_build(d, alpha, c, mu);
    out.nu = verify_moment_match(out.law, d);
    return out;
}

}  // namespace ngca::momentmatch

#endif  // NGCA_MOMENTMATCH_HPP
