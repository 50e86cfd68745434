#ifndef NGCA_PLANTED_HPP
#define NGCA_PLANTED_HPP

// Hidden-direction laws P_V^A: A along the columns of V, independent standard
// Gaussian on the orthogonal complement.

#include "ngca/errors.hpp"
#include "ngca/frame.hpp"
#include "ngca/function1d.hpp"
#include "ngca/quadrature.hpp"
#include "ngca/univariate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ngca::dist {

using subspace::OrthonormalFrame;

/// Independent coordinates; factor i is the law of the i-th hidden coordinate.
struct ProductLaw {
    std::vector<Univariate> factors;
};

using HiddenLaw = std::variant<Univariate, ProductLaw>;

struct Planted {
    Planted(OrthonormalFrame frame, HiddenLaw law) : frame(std::move(frame)), law(std::move(law)) {
        if (const auto* prod = std::get_if<ProductLaw>(&this->law)) {
            if (static_cast<Eigen::Index>(prod->factors.size()) != this->frame.m())
                throw ContractViolation("Planted: product law needs one factor per hidden coordinate");
        } else if (this->frame.m() != 1) {
            throw ContractViolation("Planted: a univariate hidden law needs m = 1");
        }
    }

    Eigen::Index n() const { return frame.n(); }
    Eigen::Index m() const { return frame.m(); }
    const Univariate& univariate() const {
        const auto* u = std::get_if<Univariate>(&law);
        if (!u) throw ContractViolation("Planted: hidden law is not univariate");
        return *u;
    }
    Eigen::VectorXd direction() const { return frame.matrix().col(0); }

    OrthonormalFrame frame;
    HiddenLaw law;
};

/// Draws x = V t + (I - V V^T) g with t ~ A and g ~ N_n.
class PlantedSampler {
public:
    explicit PlantedSampler(const Planted& p) : planted_(p) {
        if (const auto* u = std::get_if<Univariate>(&p.law))
            samplers_.emplace_back(*u);
        else
            for (const auto& f : std::get<ProductLaw>(p.law).factors) samplers_.emplace_back(f);
    }

    template <class Urbg>
    Eigen::VectorXd operator()(Urbg& rng) const {
        std::normal_distribution<double> gauss;
        const auto& v = planted_.frame.matrix();
        Eigen::VectorXd g(v.rows());
        for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = gauss(rng);
        Eigen::VectorXd t(v.cols());
        for (Eigen::Index j = 0; j < t.size(); ++j) t(j) = samplers_[static_cast<std::size_t>(j)](rng);
        const Eigen::VectorXd along = v.transpose() * g;
        g.noalias() += v * (t - along);
        return g;
    }

private:
    Planted planted_;
    std::vector<UnivariateSampler> samplers_;
};

template <class Urbg>
Eigen::VectorXd planted_sample(const Planted& p, Urbg& rng) {
    return PlantedSampler(p)(rng);
}

/// E_{g ~ N(0,1)}[phi(mean + sd g)]. Exact Gauss-Hermite for unclipped
/// polynomials, adaptive quadrature otherwise.
inline double smoothed(const Function1D& phi, double mean, double sd) {
    if (sd == 0.0) return phi(mean);
    const int deg = phi.polynomial_degree();
    if (deg >= 0) {
        const auto& rule = gauss_hermite(deg / 2 + 2);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * phi(mean + sd * rule.nodes[i]);
        return acc;
    }
    QuadOptions opt;
    opt.abs_tol = 1e-11;
    if (!phi.is_clipped()) return gaussian_expectation([&](double t) { return phi(t); }, mean, sd, opt).value;
    std::vector<double> breaks{-14.0, -8.0, -3.0, 0.0, 3.0, 8.0, 14.0};
    for (double y : phi.kinks(mean - 14.0 * sd, mean + 14.0 * sd)) breaks.push_back((y - mean) / sd);
    const auto b = make_breaks(-14.0, 14.0, breaks);
    return integrate_pieces([&](double t) { return phi(mean + sd * t) * normal_pdf(t); }, b, opt).value;
}

/// E_{z ~ A, g ~ N}[phi(rho z + sqrt(1 - rho^2) g)]: the expectation of the
/// ridge function phi(<u, x>) under P_v^A when rho = <u, v>.
inline double ridge_expectation(const Univariate& a, const Function1D& phi, double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    const double sigma = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const int deg = phi.polynomial_degree();
    QuadOptions outer;
    outer.abs_tol = 1e-10;
    double acc = 0.0;
    for (const auto& at : a.atoms) acc += at.mass * smoothed(phi, rho * at.loc, sigma);
    for (const auto& g : a.gaussians) {
        if (g.weight == 0.0) continue;
        if (!g.truncated()) {
            acc += g.weight * smoothed(phi, rho * g.mean, std::sqrt(rho * rho * g.var + sigma * sigma));
            continue;
        }
        if (deg >= 0) {
            acc += detail::integrate_gaussian_piece(g, [&](double z) { return smoothed(phi, rho * z, sigma); });
            continue;
        }
        auto f = [&](double z) { return g.density(z) * smoothed(phi, rho * z, sigma); };
        const double s = g.sd();
        acc += integrate_pieces(f, make_breaks(g.lo(), g.hi(), {g.mean - 4 * s, g.mean, g.mean + 4 * s}), outer).value;
    }
    for (const auto& p : a.patches) {
        if (deg >= 0) {
            acc += detail::integrate_patch_polynomial(p, [&](double z) { return smoothed(phi, rho * z, sigma); }, deg);
            continue;
        }
        auto f = [&](double z) { return p.poly(z) * smoothed(phi, rho * z, sigma); };
        const double c = p.half_width;
        const std::vector<double> breaks{-c, 0.0, c};
        acc += integrate_pieces(f, breaks, outer).value;
    }
    return acc;
}

/// E_{P_v^A}[phi(<u, x>)] for m = 1 and a unit vector u.
inline double planted_ridge_expectation(const Planted& p, const Function1D& phi, const Eigen::VectorXd& u) {
    if (p.m() != 1) throw ContractViolation("planted_ridge_expectation: needs m = 1");
    if (u.size() != p.n()) throw ContractViolation("planted_ridge_expectation: u has wrong length");
    if (!(std::abs(u.norm() - 1.0) <= 1e-10)) throw ContractViolation("planted_ridge_expectation: u must be a unit vector");
    return ridge_expectation(p.univariate(), phi, u.dot(p.direction()));
}

// -- chi^2 of the direction-averaged planted law ------------------------------

namespace detail {

inline double log_chi2_pdf(double nu, double s) {
    if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
    return (0.5 * nu - 1.0) * std::log(s) - 0.5 * s - 0.5 * nu * std::numbers::ln2 - std::lgamma(0.5 * nu);
}

}  // namespace detail

struct Chi2AveragedReport {
    double one_plus_chi2 = 0.0;          // integral of P^2 / chi^2_n density
    double chi2 = 0.0;                   // one_plus_chi2 - 1
    double normalization = 0.0;          // integral of P
    double refined_one_plus_chi2 = 0.0;  // same with tolerances tightened 1000x
    double relative_change = 0.0;
    double radius = 0.0;                 // s-range used
    bool finite = true;
    std::string diagnostics;
};

/// For D = E_V[P_V^A] (V Haar, m = 1), 1 + chi^2(D, N_n) equals
/// int_0^inf P(s)^2 / chi2_n(s) ds where P is the density of ||x||^2 under D:
/// the law of z^2 + W with z ~ A and W ~ chi^2_{n-1}. Both laws are rotation
/// invariant, so their chi^2 distance is that of the radial laws. With the
/// substitution y = t^2,
///   P(s) = sum_atoms mass chi2_{n-1}(s - loc^2)
///        + int_0^sqrt(s) (f(t) + f(-t)) chi2_{n-1}(s - t^2) dt.
inline Chi2AveragedReport chi2_averaged_planted(int n, int m, const Univariate& a) {
    if (m != 1) throw ContractViolation("chi2_averaged_planted: closed-form radial reduction needs m = 1");
    if (!(m < n)) throw ContractViolation("chi2_averaged_planted: need m < n");
    const double nu = n - 1.0;
    std::vector<double> inner_kinks;
    for (double b : a.breakpoints()) inner_kinks.push_back(std::abs(b));
    for (const auto& g : a.gaussians) inner_kinks.push_back(std::abs(g.mean));
    std::vector<double> outer_kinks;
    for (const auto& at : a.atoms) outer_kinks.push_back(at.loc * at.loc);
    for (double k : inner_kinks) outer_kinks.push_back(k * k);

    auto radial_density = [&](double s, double rel_tol) {
        double p = 0.0;
        for (const auto& at : a.atoms)
            if (at.mass > 0.0) p += at.mass * std::exp(detail::log_chi2_pdf(nu, s - at.loc * at.loc));
        if (!a.gaussians.empty() || !a.patches.empty()) {
            const double top = std::sqrt(s);
            auto f = [&](double t) {
                return (a.continuous_density(t) + a.continuous_density(-t)) * std::exp(detail::log_chi2_pdf(nu, s - t * t));
            };
            QuadOptions opt;
            opt.abs_tol = 1e-300;
            opt.rel_tol = rel_tol;
            p += integrate_pieces(f, make_breaks(0.0, top, inner_kinks), opt).value;
        }
        return p;
    };

    auto run = [&](double outer_tol, double inner_rel, double& norm, double& radius, bool& converged) {
        auto ratio = [&](double s) {
            const double p = radial_density(s, inner_rel);
            if (!(p > 0.0)) return 0.0;
            return std::exp(2.0 * std::log(p) - detail::log_chi2_pdf(n, s));
        };
        auto density = [&](double s) { return radial_density(s, inner_rel); };
        QuadOptions opt;
        opt.abs_tol = outer_tol;
        opt.rel_tol = 1e-14;
        double start = n + 40.0 * std::sqrt(2.0 * n);
        for (double k : outer_kinks) start = std::max(start, 2.0 * k + 40.0 * std::sqrt(2.0 * n));
        double total = integrate_pieces(ratio, make_breaks(0.0, start, outer_kinks), opt).value;
        norm = integrate_pieces(density, make_breaks(0.0, start, outer_kinks), opt).value;
        radius = start;
        converged = false;
        double previous = std::numeric_limits<double>::infinity();
        while (radius < 2e4) {
            const double next = 2.0 * radius;
            const double shell = integrate_pieces(ratio, make_breaks(radius, next, outer_kinks), opt).value;
            norm += integrate_pieces(density, make_breaks(radius, next, outer_kinks), opt).value;
            radius = next;
            if (!std::isfinite(shell)) break;
            // Growth under domain extension means divergence; the density
            // itself underflows long before the ratio would shrink again.
            if (shell > previous && shell > 1e-6 * total) break;
            previous = shell;
            total += shell;
            if (shell <= 1e-12 * (1.0 + total)) {
                converged = true;
                break;
            }
        }
        return total;
    };

    Chi2AveragedReport rep;
    bool ok_coarse = false, ok_fine = false;
    double norm_coarse = 0.0, radius_coarse = 0.0;
    rep.one_plus_chi2 = run(1e-8, 1e-9, norm_coarse, radius_coarse, ok_coarse);
    rep.refined_one_plus_chi2 = run(1e-11, 1e-12, rep.normalization, rep.radius, ok_fine);
    if (!ok_coarse || !ok_fine || !std::isfinite(rep.refined_one_plus_chi2)) {
        std::ostringstream msg;
        msg << "integral still growing at s = " << rep.radius << " (partial value " << rep.refined_one_plus_chi2 << ")";
        rep.finite = false;
        rep.diagnostics = msg.str();
        rep.one_plus_chi2 = rep.refined_one_plus_chi2 = std::numeric_limits<double>::infinity();
        rep.chi2 = std::numeric_limits<double>::infinity();
        rep.relative_change = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    rep.relative_change = std::abs(rep.refined_one_plus_chi2 - rep.one_plus_chi2) / std::abs(rep.refined_one_plus_chi2);
    rep.one_plus_chi2 = rep.refined_one_plus_chi2;
    rep.chi2 = rep.one_plus_chi2 - 1.0;
    return rep;
}

// -- periodic labels ------------------------------------------------------------

/// cos(2 pi (delta * proj + zeta)).
inline double periodic_label(double delta, double proj, double zeta) {
    return std::cos(2.0 * std::numbers::pi * (delta * proj + zeta));
}

struct PeriodicSample {
    Eigen::VectorXd x;
    double y = 0.0;
};

/// x ~ N_n, zeta ~ N(0, sigma^2), y = cos(2 pi (delta <w, x> + zeta)).
template <class Urbg>
PeriodicSample periodic_sample(const Eigen::VectorXd& w, double delta, double sigma, Urbg& rng) {
    if (!(std::abs(w.norm() - 1.0) <= 1e-10)) throw ContractViolation("periodic_sample: w must be a unit vector");
    if (!(delta > 0.0) || !(sigma >= 0.0)) throw ContractViolation("periodic_sample: need delta > 0 and sigma >= 0");
    std::normal_distribution<double> gauss;
    PeriodicSample out;
    out.x.resize(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) out.x(i) = gauss(rng);
    const double zeta = sigma * gauss(rng);
    out.y = periodic_label(delta, w.dot(out.x), zeta);
    return out;
}

}  // namespace ngca::dist

#endif  // NGCA_PLANTED_HPP
