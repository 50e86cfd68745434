#ifndef NGCA_UNIVARIATE_HPP
#define NGCA_UNIVARIATE_HPP

// Univariate laws built from three kinds of pieces:
//   atoms        mass * delta_loc
//   gaussians    weight * N(mean, var) restricted to |x| <= cut (cut = inf: none)
//   patches      p(x) * 1[|x| <= C] for a polynomial p (signed; only the sum of
//                all continuous pieces must be non-negative)
// Moments, Hermite coefficients and masses are exact or computed by fixed
// high-order quadrature of smooth integrands; nothing is estimated from samples.

#include "ngca/errors.hpp"
#include "ngca/hermite.hpp"
#include "ngca/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace ngca::dist {

using hermite::Polynomial1D;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Atom {
    double loc = 0.0;
    double mass = 0.0;
};

struct GaussianComponent {
    double mean = 0.0;
    double var = 1.0;
    double weight = 1.0;
    double cut = kInf;

    double sd() const { return std::sqrt(var); }
    bool truncated() const { return std::isfinite(cut); }

    /// Mass carried on [-bound, bound] (bound may be inf).
    double mass_within(double bound) const {
        const double c = std::min(cut, bound);
        if (!std::isfinite(c)) return weight;
        const double s = sd();
        // Pr[-c <= X <= c] = 1 - Pr[X > c] - Pr[X < -c], each tail via erfc.
        const double upper = 0.5 * std::erfc((c - mean) / (s * std::numbers::sqrt2));
        const double lower = 0.5 * std::erfc((c + mean) / (s * std::numbers::sqrt2));
        return weight * std::max(0.0, 1.0 - upper - lower);
    }
    double mass() const { return mass_within(kInf); }

    /// Pr mass on bound < |x| <= cut.
    double mass_beyond(double bound) const {
        if (bound >= cut) return 0.0;
        const double s = sd();
        auto q = [&](double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); };
        const double hi = std::isfinite(cut) ? q((cut - mean) / s) : 0.0;
        const double lo_hi = std::isfinite(cut) ? q((cut + mean) / s) : 0.0;
        return weight * (std::max(0.0, q((bound - mean) / s) - hi) + std::max(0.0, q((bound + mean) / s) - lo_hi));
    }

    double lo() const { return std::max(-cut, mean - 40.0 * sd()); }
    double hi() const { return std::min(cut, mean + 40.0 * sd()); }

    double density(double x) const {
        if (std::abs(x) > cut) return 0.0;
        const double s = sd();
        return weight * normal_pdf((x - mean) / s) / s;
    }
    double log_density(double x) const {
        if (std::abs(x) > cut || weight <= 0.0) return -kInf;
        const double s = sd();
        const double z = (x - mean) / s;
        return std::log(weight) - 0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
};

struct Patch {
    Patch(double c, Polynomial1D p) : half_width(c), poly(p.to_monomial()) {
        if (!(half_width > 0.0)) throw ContractViolation("Patch: half-width must be positive");
    }
    double half_width;
    Polynomial1D poly;  // monomial basis

    double density(double x) const { return std::abs(x) <= half_width ? poly(x) : 0.0; }

    /// integral of p over bound < |x| <= C, or over [-C, C] for bound = 0.
    double integral_beyond(double bound) const {
        if (bound >= half_width) return 0.0;
        const auto c = poly.coeffs();
        double acc = 0.0;
        for (std::size_t i = 0; i < c.size(); i += 2) {
            const double e = static_cast<double>(i + 1);
            acc += c[i] * 2.0 * (std::pow(half_width, e) - std::pow(bound, e)) / e;
        }
        return acc;
    }
    double integral() const { return integral_beyond(0.0); }

    /// integral over [-C, C] of p(x) x^t.
    double monomial_integral(int t) const {
        const auto c = poly.coeffs();
        double acc = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::size_t e = i + static_cast<std::size_t>(t);
            if (e % 2 == 1) continue;
            acc += c[i] * 2.0 * std::pow(half_width, static_cast<double>(e + 1)) / static_cast<double>(e + 1);
        }
        return acc;
    }
};

struct Univariate {
    std::vector<Atom> atoms;
    std::vector<GaussianComponent> gaussians;
    std::vector<Patch> patches;

    static Univariate standard_normal() { return normal(0.0, 1.0); }
    static Univariate normal(double mean, double var) {
        Univariate u;
        u.gaussians.push_back({mean, var, 1.0, kInf});
        return u;
    }
    static Univariate dirac(double loc) {
        Univariate u;
        u.atoms.push_back({loc, 1.0});
        return u;
    }

    double atom_mass() const {
        double m = 0.0;
        for (const auto& a : atoms) m += a.mass;
        return m;
    }
    double continuous_mass() const {
        double m = 0.0;
        for (const auto& g : gaussians) m += g.mass();
        for (const auto& p : patches) m += p.integral();
        return m;
    }
    double total_mass() const { return atom_mass() + continuous_mass(); }
    bool has_atoms() const {
        return std::any_of(atoms.begin(), atoms.end(), [](const Atom& a) { return a.mass > 0.0; });
    }

    double continuous_density(double x) const {
        double f = 0.0;
        for (const auto& g : gaussians) f += g.density(x);
        for (const auto& p : patches) f += p.density(x);
        return f;
    }

    /// log of the continuous density; stays finite far in the Gaussian tails
    /// where the density itself underflows.
    double log_continuous_density(double x) const {
        bool in_patch = false;
        for (const auto& p : patches) in_patch = in_patch || std::abs(x) <= p.half_width;
        if (in_patch) {
            const double f = continuous_density(x);
            return f > 0.0 ? std::log(f) : -kInf;
        }
        double best = -kInf;
        for (const auto& g : gaussians) best = std::max(best, g.log_density(x));
        if (!std::isfinite(best)) return best;
        double s = 0.0;
        for (const auto& g : gaussians) s += std::exp(g.log_density(x) - best);
        return best + std::log(s);
    }

    /// Jump/kink locations of the continuous density.
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (const auto& g : gaussians)
            if (g.truncated()) {
                b.push_back(-g.cut);
                b.push_back(g.cut);
            }
        for (const auto& p : patches) {
            b.push_back(-p.half_width);
            b.push_back(p.half_width);
        }
        return b;
    }

    /// Interval outside of which the continuous density is below e^-800.
    std::pair<double, double> continuous_range() const {
        double lo = kInf, hi = -kInf;
        for (const auto& g : gaussians) {
            if (g.weight == 0.0) continue;
            lo = std::min(lo, g.lo());
            hi = std::max(hi, g.hi());
        }
        for (const auto& p : patches) {
            lo = std::min(lo, -p.half_width);
            hi = std::max(hi, p.half_width);
        }
        if (lo > hi) return {0.0, 0.0};
        return {lo, hi};
    }

    Univariate scaled(double factor) const {
        Univariate out = *this;
        for (auto& a : out.atoms) a.mass *= factor;
        for (auto& g : out.gaussians) g.weight *= factor;
        for (auto& p : out.patches) {
            std::vector<double> c(p.poly.coeffs().begin(), p.poly.coeffs().end());
            for (double& v : c) v *= factor;
            p.poly = Polynomial1D::monomial(std::move(c));
        }
        return out;
    }
};

/// Mixture sum_i w_i * law_i.
inline Univariate mixture(const std::vector<std::pair<double, Univariate>>& parts) {
    Univariate out;
    for (const auto& [w, law] : parts) {
        const auto s = law.scaled(w);
        out.atoms.insert(out.atoms.end(), s.atoms.begin(), s.atoms.end());
        out.gaussians.insert(out.gaussians.end(), s.gaussians.begin(), s.gaussians.end());
        out.patches.insert(out.patches.end(), s.patches.begin(), s.patches.end());
    }
    return out;
}

namespace detail {

// Smooth integrand over a Gaussian piece's (possibly cut) support.
template <class F>
double integrate_gaussian_piece(const GaussianComponent& g, F&& f) {
    const double lo = g.lo();
    const double hi = g.hi();
    if (!(hi > lo)) return 0.0;
    const int panels = std::max(8, static_cast<int>(std::ceil((hi - lo) / (0.5 * g.sd()))));
    return composite_legendre([&](double x) { return f(x) * g.density(x); }, lo, hi, panels, 20);
}

// Exact Gauss-Legendre integral of f * p over a patch when f is a polynomial
// of degree <= extra_degree.
template <class F>
double integrate_patch_polynomial(const Patch& p, F&& f, int extra_degree) {
    const int nodes = (p.poly.degree() + extra_degree) / 2 + 2;
    const auto& rule = gauss_legendre(nodes);
    const double c = p.half_width;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = c * rule.nodes[i];
        acc += rule.weights[i] * p.poly(x) * f(x);
    }
    return c * acc;
}

}  // namespace detail

struct InvariantReport {
    double mass_error = 0.0;
    double min_density = 0.0;
    double min_location = 0.0;
    bool ok = true;
};

/// Total mass equals one within 1e-10 and the continuous density is
/// non-negative on a 10^4-point grid of its effective support.
inline InvariantReport check_invariants(const Univariate& a, int grid = 10000) {
    InvariantReport r;
    for (const auto& at : a.atoms)
        if (at.mass < 0.0) r.ok = false;
    for (const auto& g : a.gaussians)
        if (g.weight < 0.0 || !(g.var > 0.0)) r.ok = false;
    r.mass_error = std::abs(a.total_mass() - 1.0);
    const auto [lo, hi] = a.continuous_range();
    r.min_density = kInf;
    if (hi > lo) {
        for (int i = 0; i <= grid; ++i) {
            const double x = lo + (hi - lo) * i / grid;
            const double f = a.continuous_density(x);
            if (f < r.min_density) {
                r.min_density = f;
                r.min_location = x;
            }
        }
        // Patch edges are where negativity hides.
        for (double b : a.breakpoints())
            for (double x : {b, std::nextafter(b, 0.0)}) {
                const double f = a.continuous_density(x);
                if (f < r.min_density) {
                    r.min_density = f;
                    r.min_location = x;
                }
            }
    } else {
        r.min_density = 0.0;
    }
    r.ok = r.ok && r.mass_error <= 1e-10 && r.min_density >= 0.0;
    return r;
}

/// Raw moment E_A[x^t].
inline double uni_moment(const Univariate& a, int t) {
    if (t < 0 || t > 64) throw ContractViolation("uni_moment: order must be in [0, 64]");
    double acc = 0.0;
    for (const auto& at : a.atoms) acc += at.mass * std::pow(at.loc, t);
    for (const auto& g : a.gaussians) {
        if (g.weight == 0.0) continue;
        if (!g.truncated()) {
            // E[(mu + s Z)^t] = sum_{j even} C(t, j) mu^{t-j} s^j (j-1)!!
            const double s = g.sd();
            double sum = 0.0;
            double binom = 1.0;
            for (int j = 0; j <= t; ++j) {
                if (j > 0) binom = binom * (t - j + 1) / j;
                if (j % 2 == 0) sum += binom * std::pow(g.mean, t - j) * std::pow(s, j) * hermite::gaussian_moment(j);
            }
            acc += g.weight * sum;
        } else {
            acc += detail::integrate_gaussian_piece(g, [t](double x) { return std::pow(x, t); });
        }
    }
    for (const auto& p : a.patches) acc += p.monomial_integral(t);
    return acc;
}

/// A_k = E_A[h_k(x)].
///
/// Each piece is handled in the form that avoids the cancellation of the
/// monomial expansion: atoms evaluate h_k directly, untruncated Gaussians use
/// E[He_k(mu + sZ)] = sum_j k!/(j!(k-2j)!) mu^{k-2j} ((s^2-1)/2)^j (generating
/// function exp(xt - t^2/2)), patches use an exact Gauss-Legendre rule.
inline double uni_hermite_coeff(const Univariate& a, int k) {
    if (k < 0 || k > 64) throw ContractViolation("uni_hermite_coeff: order must be in [0, 64]");
    double acc = 0.0;
    for (const auto& at : a.atoms) acc += at.mass * hermite::h_eval(k, at.loc);
    const double half_log_kfact = 0.5 * hermite::log_factorial(k);
    for (const auto& g : a.gaussians) {
        if (g.weight == 0.0) continue;
        if (!g.truncated()) {
            const double shift = 0.5 * (g.var - 1.0);
            double sum = 0.0;
            for (int j = 0; 2 * j <= k; ++j) {
                if (j > 0 && shift == 0.0) break;
                const double coef =
                    std::exp(half_log_kfact - hermite::log_factorial(j) - hermite::log_factorial(k - 2 * j));
                sum += coef * std::pow(g.mean, k - 2 * j) * std::pow(shift, j);
            }
            acc += g.weight * sum;
        } else {
            acc += detail::integrate_gaussian_piece(g, [k](double x) { return hermite::h_eval(k, x); });
        }
    }
    for (const auto& p : a.patches)
        acc += detail::integrate_patch_polynomial(p, [k](double x) { return hermite::h_eval(k, x); }, k);
    return acc;
}

/// E_A[q(x)] for a polynomial q.
inline double uni_expectation(const Univariate& a, const Polynomial1D& q) {
    const auto mono = q.to_monomial();
    const auto c = mono.coeffs();
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) acc += c[i] * uni_moment(a, static_cast<int>(i));
    return acc;
}

/// Density of the continuous part. Atoms are reported separately; asking
/// for the density at an atom location is a contract violation.
inline double uni_pdf(const Univariate& a, double x) {
    for (const auto& at : a.atoms)
        if (at.mass > 0.0 && at.loc == x) throw ContractViolation("uni_pdf: x is an atom location");
    return a.continuous_density(x);
}

/// Pr_A[X <= x], atoms included.
inline double uni_cdf(const Univariate& a, double x) {
    double acc = 0.0;
    for (const auto& at : a.atoms)
        if (at.loc <= x) acc += at.mass;
    for (const auto& g : a.gaussians) {
        if (x < -g.cut) continue;
        const double s = g.sd();
        const double upper = normal_cdf((std::min(x, g.cut) - g.mean) / s);
        const double lower = std::isfinite(g.cut) ? normal_cdf((-g.cut - g.mean) / s) : 0.0;
        acc += g.weight * (upper - lower);
    }
    for (const auto& p : a.patches) {
        const double c = p.half_width;
        if (x <= -c) continue;
        const double top = std::min(x, c);
        const auto coef = p.poly.coeffs();
        for (std::size_t i = 0; i < coef.size(); ++i) {
            const double e = static_cast<double>(i + 1);
            acc += coef[i] * (std::pow(top, e) - std::pow(-c, e)) / e;
        }
    }
    return acc;
}

/// Pre-digested sampler. Atoms are drawn by mass; the continuous part by
/// rejection from the envelope sum_g w_g N_g + sum_p sup|p| 1[|x| <= C_p],
/// which dominates the (non-negative) continuous density.
class UnivariateSampler {
public:
    explicit UnivariateSampler(const Univariate& a) : law_(a) {
        for (const auto& at : a.atoms)
            if (at.mass > 0.0) {
                atom_locs_.push_back(at.loc);
                weights_.push_back(at.mass);
            }
        atom_count_ = atom_locs_.size();
        continuous_mass_ = std::max(0.0, a.continuous_mass());
        weights_.push_back(continuous_mass_);
        for (const auto& g : a.gaussians) envelope_weights_.push_back(std::max(0.0, g.weight));
        for (const auto& p : a.patches) {
            // Grid max inflated by Markov's inequality |p'| <= deg^2 sup|p| / C.
            const int grid = 4000;
            double m = 0.0;
            for (int i = 0; i <= grid; ++i) m = std::max(m, std::abs(p.poly(-p.half_width + 2.0 * p.half_width * i / grid)));
            const double deg = p.poly.degree();
            const double slack = 1.0 - deg * deg / static_cast<double>(grid);
            const double bound = slack > 0.1 ? m / slack : 10.0 * m + 1.0;
            patch_bounds_.push_back(bound);
            envelope_weights_.push_back(bound * 2.0 * p.half_width);
        }
        pick_ = std::discrete_distribution<std::size_t>(weights_.begin(), weights_.end());
        if (!envelope_weights_.empty() && continuous_mass_ > 0.0)
            envelope_pick_ = std::discrete_distribution<std::size_t>(envelope_weights_.begin(), envelope_weights_.end());
    }

    template <class Urbg>
    double operator()(Urbg& rng) const {
        const std::size_t which = pick_(rng);
        if (which < atom_count_) return atom_locs_[which];
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> gauss;
        const std::size_t ng = law_.gaussians.size();
        for (;;) {
            const std::size_t e = envelope_pick_(rng);
            double x;
            if (e < ng) {
                const auto& g = law_.gaussians[e];
                x = g.mean + g.sd() * gauss(rng);
            } else {
                const auto& p = law_.patches[e - ng];
                x = p.half_width * (2.0 * unif(rng) - 1.0);
            }
            double env = 0.0;
            for (const auto& g : law_.gaussians) {
                const double s = g.sd();
                env += std::max(0.0, g.weight) * normal_pdf((x - g.mean) / s) / s;
            }
            for (std::size_t i = 0; i < law_.patches.size(); ++i)
                if (std::abs(x) <= law_.patches[i].half_width) env += patch_bounds_[i];
            const double f = law_.continuous_density(x);
            if (unif(rng) * env <= f) return x;
        }
    }

private:
    Univariate law_;
    std::vector<double> atom_locs_;
    std::vector<double> weights_;
    std::size_t atom_count_ = 0;
    double continuous_mass_ = 0.0;
    std::vector<double> envelope_weights_;
    std::vector<double> patch_bounds_;
    mutable std::discrete_distribution<std::size_t> pick_;
    mutable std::discrete_distribution<std::size_t> envelope_pick_;
};

template <class Urbg>
double uni_sample(const Univariate& a, Urbg& rng) {
    return UnivariateSampler(a)(rng);
}

/// Pr_A[|x| > bound], accumulated from the tails of each piece.
inline double tail_probability(const Univariate& a, double bound) {
    double p = 0.0;
    for (const auto& at : a.atoms)
        if (std::abs(at.loc) > bound) p += at.mass;
    for (const auto& g : a.gaussians) p += g.mass_beyond(bound);
    for (const auto& pa : a.patches) p += pa.integral_beyond(bound);
    return p;
}

struct Truncation {
    Univariate law;
    double p_out = 0.0;
};

/// A conditioned on |x| <= bound, with the rejected mass Pr_A[|x| > bound].
inline Truncation truncate(const Univariate& a, double bound) {
    if (!(bound > 0.0)) throw ContractViolation("truncate: radius must be positive");
    Truncation out;
    out.p_out = tail_probability(a, bound);
    const double kept = a.total_mass() - out.p_out;
    if (!(kept >= 1e-6)) throw ContractViolation("truncate: less than 1e-6 of the mass lies inside the radius");
    Univariate t;
    for (const auto& at : a.atoms)
        if (std::abs(at.loc) <= bound) t.atoms.push_back(at);
    for (auto g : a.gaussians) {
        g.cut = std::min(g.cut, bound);
        t.gaussians.push_back(g);
    }
    for (const auto& p : a.patches) t.patches.emplace_back(std::min(p.half_width, bound), p.poly);
    out.law = t.scaled(1.0 / kept);
    return out;
}

/// Total variation distance: half the atom-mass discrepancy plus half the L1
/// distance of the continuous parts (adaptive quadrature, abs tol 1e-10).
inline double tv_distance(const Univariate& a, const Univariate& b) {
    std::vector<double> locs;
    for (const auto& at : a.atoms) locs.push_back(at.loc);
    for (const auto& at : b.atoms) locs.push_back(at.loc);
    std::sort(locs.begin(), locs.end());
    locs.erase(std::unique(locs.begin(), locs.end()), locs.end());
    double atom_part = 0.0;
    for (double x : locs) {
        double ma = 0.0, mb = 0.0;
        for (const auto& at : a.atoms)
            if (at.loc == x) ma += at.mass;
        for (const auto& at : b.atoms)
            if (at.loc == x) mb += at.mass;
        atom_part += std::abs(ma - mb);
    }
    const auto [alo, ahi] = a.continuous_range();
    const auto [blo, bhi] = b.continuous_range();
    const double lo = std::min(alo, blo), hi = std::max(ahi, bhi);
    double cont = 0.0;
    if (hi > lo) {
        auto interior = a.breakpoints();
        const auto more = b.breakpoints();
        interior.insert(interior.end(), more.begin(), more.end());
        for (const auto& g : a.gaussians) interior.push_back(g.mean);
        for (const auto& g : b.gaussians) interior.push_back(g.mean);
        const auto breaks = make_breaks(lo, hi, interior);
        QuadOptions opt;
        opt.abs_tol = 1e-11;
        cont = integrate_pieces([&](double x) { return std::abs(a.continuous_density(x) - b.continuous_density(x)); },
                                breaks, opt)
                   .value;
    }
    return 0.5 * (atom_part + cont);
}

/// chi^2(A, N(0,1)) = int A^2 / phi - 1. Infinite when A has an atom, when an
/// untruncated Gaussian piece has variance >= 2, or when the integral keeps
/// growing as the domain is doubled.
inline double chi_squared_vs_gaussian(const Univariate& a) {
    if (a.has_atoms()) return kInf;
    for (const auto& g : a.gaussians)
        if (g.weight > 0.0 && !g.truncated() && g.var >= 2.0) return kInf;
    const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi);
    auto integrand = [&](double x) {
        const double lf = a.log_continuous_density(x);
        if (!std::isfinite(lf)) return 0.0;
        return std::exp(2.0 * lf + 0.5 * x * x + log_norm);
    };
    auto interior = a.breakpoints();
    for (const auto& g : a.gaussians) interior.push_back(g.mean);
    const auto [lo0, hi0] = a.continuous_range();
    double radius = std::max({12.0, std::abs(lo0), std::abs(hi0)});
    for (const auto& g : a.gaussians) radius = std::max(radius, 2.0 * std::abs(g.mean) + 12.0 * g.sd());
    QuadOptions opt;
    opt.abs_tol = 1e-11;
    double total = integrate_pieces(integrand, make_breaks(-radius, radius, interior), opt).value;
    while (radius < 1e4) {
        const double next = 2.0 * radius;
        const double shell = integrate_pieces(integrand, make_breaks(radius, next, interior), opt).value +
                             integrate_pieces(integrand, make_breaks(-next, -radius, interior), opt).value;
        if (!std::isfinite(shell)) return kInf;
        total += shell;
        radius = next;
        if (shell <= 1e-13 * (1.0 + total)) return total - 1.0;
    }
    return kInf;
}

// -- instance JSON -----------------------------------------------------------

inline nlohmann::json to_json(const Univariate& a) {
    nlohmann::json j;
    j["atoms"] = nlohmann::json::array();
    for (const auto& at : a.atoms) j["atoms"].push_back({{"loc", at.loc}, {"mass", at.mass}});
    j["gaussians"] = nlohmann::json::array();
    for (const auto& g : a.gaussians) {
        nlohmann::json gj = {{"mean", g.mean}, {"var", g.var}, {"weight", g.weight}};
        if (g.truncated()) gj["cut"] = g.cut;
        j["gaussians"].push_back(gj);
    }
    j["patches"] = nlohmann::json::array();
    for (const auto& p : a.patches) {
        const auto c = p.poly.coeffs();
        j["patches"].push_back({{"C", p.half_width}, {"coeffs_monomial", std::vector<double>(c.begin(), c.end())}});
    }
    return j;
}

inline Univariate from_json(const nlohmann::json& j) {
    Univariate a;
    if (j.contains("atoms"))
        for (const auto& at : j.at("atoms")) a.atoms.push_back({at.at("loc").get<double>(), at.at("mass").get<double>()});
    if (j.contains("gaussians"))
        for (const auto& g : j.at("gaussians")) {
            GaussianComponent c{g.at("mean").get<double>(), g.at("var").get<double>(), g.at("weight").get<double>(), kInf};
            if (g.contains("cut")) c.cut = g.at("cut").get<double>();
            a.gaussians.push_back(c);
        }
    if (j.contains("patches"))
        for (const auto& p : j.at("patches"))
            a.patches.emplace_back(p.at("C").get<double>(),
                                   Polynomial1D::monomial(p.at("coeffs_monomial").get<std::vector<double>>()));
    return a;
}

inline std::string dump_instance(const Univariate& a) { return to_json(a).dump(2) + "\n"; }

inline Univariate read_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    return from_json(nlohmann::json::parse(in));
}

inline void write_instance(const Univariate& a, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << dump_instance(a);
}

}  // namespace ngca::dist

#endif  // NGCA_UNIVARIATE_HPP
