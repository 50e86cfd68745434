#ifndef NGCA_SQSIM_HPP
#define NGCA_SQSIM_HPP

// STAT(tau) oracles, the single-query radial distinguisher, the Fourier
// decomposition check, the ridge concentration experiment and the game runner.

#include "ngca/errors.hpp"
#include "ngca/frame.hpp"
#include "ngca/function1d.hpp"
#include "ngca/hermite.hpp"
#include "ngca/hermite_tensor.hpp"
#include "ngca/momentmatch.hpp"
#include "ngca/planted.hpp"
#include "ngca/quadrature.hpp"
#include "ngca/rng.hpp"
#include "ngca/subspace.hpp"
#include "ngca/univariate.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace ngca::sqsim {

using dist::Planted;
using dist::Univariate;
using hermite::Polynomial1D;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// -- queries and laws ---------------------------------------------------------------

/// phi(<u, x>) for a unit vector u.
struct RidgeQuery {
    Eigen::VectorXd u;
    Function1D phi;
};

/// He_k(w) 1[|w| <= clip] with w = (|x|^2 - n) / sqrt(n); clip = inf means unclipped.
struct RadialHermiteQuery {
    int k = 2;
    double clip = kInf;
};

/// clamp(p(<u, x>), lo, hi).
struct ClippedPolynomialQuery {
    Eigen::VectorXd u;
    Polynomial1D poly;
    double lo = -1.0;
    double hi = 1.0;
};

using Query = std::variant<RidgeQuery, RadialHermiteQuery, ClippedPolynomialQuery>;

struct NullLaw {
    int n = 0;
};

using Law = std::variant<NullLaw, Planted>;

inline int dimension(const Law& law) {
    if (const auto* nl = std::get_if<NullLaw>(&law)) return nl->n;
    return static_cast<int>(std::get<Planted>(law).n());
}

inline nlohmann::json query_to_json(const Query& q) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    if (const auto* r = std::get_if<RidgeQuery>(&q)) return {{"type", "ridge"}, {"u", vec(r->u)}, {"phi", to_json(r->phi)}};
    if (const auto* h = std::get_if<RadialHermiteQuery>(&q)) {
        nlohmann::json j = {{"type", "radial_hermite"}, {"k", h->k}};
        if (std::isfinite(h->clip)) j["clip"] = h->clip;
        return j;
    }
    const auto& c = std::get<ClippedPolynomialQuery>(q);
    const auto mono = c.poly.to_monomial();
    const auto coef = mono.coeffs();
    return {{"type", "clipped_polynomial"},
            {"u", vec(c.u)},
            {"coeffs_monomial", std::vector<double>(coef.begin(), coef.end())},
            {"lo", c.lo},
            {"hi", c.hi}};
}

namespace detail {

inline RidgeQuery as_ridge(const ClippedPolynomialQuery& c) {
    return {c.u, Function1D::polynomial(c.poly).clipped(c.lo, c.hi)};
}

inline void check_unit(const Eigen::VectorXd& u, int n) {
    if (u.size() != n) throw ContractViolation("query: direction has wrong length");
    if (!(std::abs(u.norm() - 1.0) <= 1e-10)) throw ContractViolation("query: direction must be a unit vector");
}

inline double binomial(int n, int k) {
    return std::exp(hermite::log_factorial(n) - hermite::log_factorial(k) - hermite::log_factorial(n - k));
}

// Raw moments E[W^j], j = 0..J, of W = (Y - nu) / sqrt(n) with Y ~ chi^2_nu,
// from the cumulants kappa_j(Y) = nu 2^{j-1} (j-1)!.
inline std::vector<double> centered_chi2_moments(double nu, double n, int J) {
    std::vector<double> kappa(J + 1, 0.0), m(J + 1, 0.0);
    for (int j = 2; j <= J; ++j)
        kappa[j] = nu * std::exp((j - 1) * std::log(2.0) + hermite::log_factorial(j - 1) - 0.5 * j * std::log(n));
    m[0] = 1.0;
    for (int j = 1; j <= J; ++j) {
        double s = 0.0;
        for (int i = 1; i <= j; ++i) s += binomial(j - 1, i - 1) * kappa[i] * m[j - i];
        m[j] = s;
    }
    return m;
}

// E_A[X^i], i = 0..I, for X = (z^2 - 1) / sqrt(n), z ~ A.
inline std::vector<double> radial_offset_moments(const Univariate& a, double n, int I) {
    if (2 * I > 64) throw ContractViolation("radial moments: order too high");
    std::vector<double> z2(I + 1);
    for (int j = 0; j <= I; ++j) z2[j] = dist::uni_moment(a, 2 * j);
    std::vector<double> out(I + 1);
    for (int i = 0; i <= I; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += binomial(i, j) * ((i - j) % 2 ? -1.0 : 1.0) * z2[j];
        out[i] = s * std::pow(n, -0.5 * i);
    }
    return out;
}

// E[w^i], i = 0..I, for w = X + W with independent X (hidden coordinate) and
// W (the n - 1 orthogonal coordinates).
inline std::vector<double> radial_moments(const Univariate& a, int n, int I) {
    const auto x = radial_offset_moments(a, n, I);
    const auto w = centered_chi2_moments(n - 1.0, n, I);
    std::vector<double> out(I + 1, 0.0);
    for (int i = 0; i <= I; ++i)
        for (int j = 0; j <= i; ++j) out[i] += binomial(i, j) * x[j] * w[i - j];
    return out;
}

inline double expectation_from_moments(const std::vector<double>& coeffs, const std::vector<double>& moments) {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * moments.at(i);
    return s;
}

/// E[He_k(w)] for the unclipped radial statistic under P_v^A via
/// He_k(X + W) = sum_l C(k, l) X^{k-l} He_l(W).
inline double radial_hermite_addition(const Univariate& a, int n, int k) {
    const auto x = radial_offset_moments(a, n, k);
    const auto w = centered_chi2_moments(n - 1.0, n, k);
    double s = 0.0;
    for (int l = 0; l <= k; ++l) s += binomial(k, l) * x[k - l] * expectation_from_moments(hermite::he_monomial_coefficients(l), w);
    return s;
}

// sqrt(n) * density of chi^2_nu at n + sqrt(n) w - shift.
inline double radial_density(double nu, double n, double shift, double w) {
    const double y = n + std::sqrt(n) * w - shift;
    if (!(y > 0.0)) return 0.0;
    return std::sqrt(n) * std::exp(dist::detail::log_chi2_pdf(nu, y));
}

inline std::vector<double> unit_breaks(double lo, double hi) {
    std::vector<double> interior;
    for (double t = std::ceil(lo); t < hi; t += 1.0) interior.push_back(t);
    return make_breaks(lo, hi, interior);
}

// Upper integration limit for an unclipped He_k against a chi^2-shaped density.
inline double radial_upper(double nu, double n, double shift, int k) {
    double w = 10.0;
    while (w < 1e4) {
        const double d = radial_density(nu, n, shift, w);
        if (d == 0.0 || std::log(d) + k * std::log(w) < -90.0) break;
        w += 1.0;
    }
    return w;
}

/// int He_k(w) 1[|w| <= clip] sqrt(n) chi^2_nu(n + sqrt(n) w - shift) dw.
inline double radial_inner(int k, double clip, double nu, double n, double shift) {
    const double lo = std::max(-clip, (shift - n) / std::sqrt(n));
    const double hi = std::isfinite(clip) ? clip : radial_upper(nu, n, shift, k);
    if (!(hi > lo)) return 0.0;
    QuadOptions opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-13;
    const auto b = unit_breaks(lo, hi);
    return integrate_pieces([&](double w) { return hermite::he_eval(k, w) * radial_density(nu, n, shift, w); }, b, opt).value;
}

inline double radial_null(int n, int k, double clip) { return radial_inner(k, clip, n, n, 0.0); }

/// Clipped radial statistic under P_v^A: outer integral over the hidden coordinate.
inline double radial_planted_clipped(const Univariate& a, int n, int k, double clip) {
    const double nn = n;
    auto g = [&](double z) { return radial_inner(k, clip, nn - 1.0, nn, z * z); };
    double acc = 0.0;
    for (const auto& at : a.atoms) acc += at.mass * g(at.loc);
    const double reach = std::sqrt(nn + clip * std::sqrt(nn));
    std::vector<double> interior = a.breakpoints();
    interior.push_back(0.0);
    const double inner_edge = nn - clip * std::sqrt(nn);
    if (inner_edge > 0.0) {
        interior.push_back(std::sqrt(inner_edge));
        interior.push_back(-std::sqrt(inner_edge));
    }
    for (double t = -std::floor(reach); t <= reach; t += 1.0) interior.push_back(t);
    auto range = a.continuous_range();
    const double lo = std::max(-reach, range.first), hi = std::min(reach, range.second);
    if (hi > lo) {
        QuadOptions opt;
        opt.abs_tol = 1e-11;
        const auto b = make_breaks(lo, hi, interior);
        acc += integrate_pieces([&](double z) { return a.continuous_density(z) * g(z); }, b, opt).value;
    }
    return acc;
}

}  // namespace detail

/// Exact expectation of q under the null N_n or a planted law.
inline double query_value(const Query& q, const Law& law) {
    const int n = dimension(law);
    if (const auto* c = std::get_if<ClippedPolynomialQuery>(&q)) return query_value(detail::as_ridge(*c), law);
    if (const auto* r = std::get_if<RidgeQuery>(&q)) {
        detail::check_unit(r->u, n);
        if (std::holds_alternative<NullLaw>(law)) return dist::smoothed(r->phi, 0.0, 1.0);
        const auto& p = std::get<Planted>(law);
        if (p.m() != 1) throw ContractViolation("query_value: ridge queries under planted laws need m = 1");
        return dist::planted_ridge_expectation(p, r->phi, r->u);
    }
    const auto& h = std::get<RadialHermiteQuery>(q);
    if (h.k < 0 || h.k > 16) throw ContractViolation("query_value: radial order must be in [0, 16]");
    if (!(h.clip > 0.0)) throw ContractViolation("query_value: clip level must be positive");
    if (n < 3) throw ContractViolation("query_value: radial queries need n >= 3");
    if (std::holds_alternative<NullLaw>(law)) return detail::radial_null(n, h.k, h.clip);
    const auto& p = std::get<Planted>(law);
    if (p.m() != 1) throw ContractViolation("query_value: radial queries under planted laws need m = 1");
    if (!std::isfinite(h.clip)) return detail::radial_hermite_addition(p.univariate(), n, h.k);
    return detail::radial_planted_clipped(p.univariate(), n, h.k, h.clip);
}

/// sup |q| (infinite for unbounded queries).
inline double query_sup(const Query& q) {
    if (const auto* c = std::get_if<ClippedPolynomialQuery>(&q)) return std::max(std::abs(c->lo), std::abs(c->hi));
    if (const auto* r = std::get_if<RidgeQuery>(&q)) {
        const auto& f = r->phi;
        double top = f.hi, bottom = f.lo;
        if (f.kind == Function1D::Kind::tanh || f.kind == Function1D::Kind::cos) {
            top = std::min(top, 1.0);
            bottom = std::max(bottom, -1.0);
        }
        if (f.kind == Function1D::Kind::constant) top = bottom = std::clamp(f.b, f.lo, f.hi);
        return std::max(std::abs(top), std::abs(bottom));
    }
    const auto& h = std::get<RadialHermiteQuery>(q);
    if (!std::isfinite(h.clip)) return h.k == 0 ? 1.0 : kInf;
    // |He_k| on [-M, M]: extremes sit at the endpoints or interior critical
    // points; a dense grid plus the endpoints, padded by the grid's Markov slack.
    double best = 0.0;
    const int grid = 20000;
    for (int i = 0; i <= grid; ++i) best = std::max(best, std::abs(hermite::he_eval(h.k, -h.clip + 2.0 * h.clip * i / grid)));
    return best / (1.0 - static_cast<double>(h.k * h.k) / grid);
}

// -- clip accounting -------------------------------------------------------------------

struct ClipAccounting {
    double second_moment = 0.0;  // E[He_k(w)^2], unclipped
    double tail_probability = 0.0;  // moment bound on Pr[|w| > M]
    double bound = 0.0;  // sqrt(second_moment * tail_probability) >= |E F_M - E F|
};

/// Cauchy-Schwarz bound on the clipping correction:
/// |E[He_k(w) 1[|w| > M]]| <= sqrt(E[He_k(w)^2] Pr[|w| > M]), with
/// Pr[|w| > M] <= min_j E[w^{2j}] / M^{2j}, j = 1..12. `a` is the hidden law
/// (standard normal for the null).
inline ClipAccounting clip_accounting(const Univariate& a, int n, int k, double clip) {
    constexpr int J = 12;
    const auto mom = detail::radial_moments(a, n, std::max(2 * k, 2 * J));
    const auto he = hermite::he_monomial_coefficients(k);
    std::vector<double> sq(2 * k + 1, 0.0);
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j) sq[i + j] += he[i] * he[j];
    ClipAccounting acc;
    acc.second_moment = detail::expectation_from_moments(sq, mom);
    acc.tail_probability = 1.0;
    if (std::isfinite(clip))
        for (int j = 1; j <= J; ++j) acc.tail_probability = std::min(acc.tail_probability, mom[2 * j] / std::pow(clip, 2 * j));
    else
        acc.tail_probability = 0.0;
    acc.bound = std::sqrt(std::max(0.0, acc.second_moment) * acc.tail_probability);
    return acc;
}

// -- oracles -------------------------------------------------------------------------------

enum class OracleMode { honest_exact, honest_mc, adversarial_null };

inline std::string to_string(OracleMode m) {
    switch (m) {
        case OracleMode::honest_exact: return "honest-exact";
        case OracleMode::honest_mc: return "honest-mc";
        case OracleMode::adversarial_null: return "adversarial-null";
    }
    return "?";
}

inline OracleMode parse_oracle_mode(const std::string& s) {
    if (s == "honest-exact") return OracleMode::honest_exact;
    if (s == "honest-mc") return OracleMode::honest_mc;
    if (s == "adversarial-null") return OracleMode::adversarial_null;
    throw ConfigError("unknown oracle mode '" + s + "'");
}

struct OracleConfig {
    double tau = 0.0;
    OracleMode mode = OracleMode::honest_exact;
    std::size_t samples = 0;  // honest-mc only
    std::uint64_t seed = 0;
    bool enforce_budget = true;  // honest-mc: refuse sample counts below the 4-sigma budget

    nlohmann::json to_json() const {
        return {{"tau", tau}, {"mode", to_string(mode)}, {"samples", samples}, {"seed", seed}, {"enforce_budget", enforce_budget}};
    }
};

struct OracleAnswer {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
    bool detected = false;          // adversarial mode: the gap exceeded tau
    double required_samples = 0.0;  // honest-mc: 4-sigma budget (16 sd^2 / tau^2)
};

namespace detail {

/// Upper bound on the standard deviation of q under `law`.
inline double query_sd_bound(const Query& q, const Law& law) {
    if (const auto* h = std::get_if<RadialHermiteQuery>(&q)) {
        const int n = dimension(law);
        const Univariate a = std::holds_alternative<NullLaw>(law) ? Univariate::standard_normal()
                                                                   : std::get<Planted>(law).univariate();
        return std::sqrt(clip_accounting(a, n, h->k, kInf).second_moment);
    }
    return query_sup(q);
}

struct MomentSums {
    double sum = 0.0;
    double sum_sq = 0.0;
};

/// Draws of the query value under `law`, reduced through the sufficient
/// statistic (<u, x> for ridge queries, |x|^2 for radial ones) when m = 1.
class QuerySampler {
public:
    QuerySampler(const Query& q, const Law& law) : query_(q), law_(law), n_(dimension(law)) {
        if (const auto* p = std::get_if<Planted>(&law_)) {
            if (p->m() == 1)
                hidden_.emplace(p->univariate());
            else
                full_.emplace(*p);
        }
        if (const auto* c = std::get_if<ClippedPolynomialQuery>(&query_)) query_ = as_ridge(*c);
        if (const auto* r = std::get_if<RidgeQuery>(&query_)) {
            check_unit(r->u, n_);
            if (const auto* p = std::get_if<Planted>(&law_); p && p->m() == 1) {
                rho_ = std::clamp(r->u.dot(p->direction()), -1.0, 1.0);
                sigma_ = std::sqrt(std::max(0.0, 1.0 - rho_ * rho_));
            }
        }
    }

    template <class Urbg>
    double operator()(Urbg& rng) const {
        std::normal_distribution<double> gauss;
        if (const auto* r = std::get_if<RidgeQuery>(&query_)) {
            if (full_) return r->phi((*full_)(rng).dot(r->u));
            if (hidden_) {
                const double z = (*hidden_)(rng);
                return r->phi(rho_ * z + sigma_ * gauss(rng));
            }
            return r->phi(gauss(rng));
        }
        const auto& h = std::get<RadialHermiteQuery>(query_);
        double s;
        if (full_) {
            s = (*full_)(rng).squaredNorm();
        } else if (hidden_) {
            const double z = (*hidden_)(rng);
            std::gamma_distribution<double> chi2(0.5 * (n_ - 1), 2.0);
            s = z * z + chi2(rng);
        } else {
            std::gamma_distribution<double> chi2(0.5 * n_, 2.0);
            s = chi2(rng);
        }
        const double w = (s - n_) / std::sqrt(static_cast<double>(n_));
        return std::abs(w) <= h.clip ? hermite::he_eval(h.k, w) : 0.0;
    }

private:
    Query query_;
    Law law_;
    int n_;
    std::optional<dist::UnivariateSampler> hidden_;
    std::optional<dist::PlantedSampler> full_;
    double rho_ = 0.0;
    double sigma_ = 1.0;
};

inline constexpr std::size_t kMcChunks = 64;

/// Sample mean over `samples` draws split into a fixed number of chunks, each
/// with its own derived stream, summed in chunk order.
inline OracleAnswer monte_carlo(const Query& q, const Law& law, std::size_t samples, std::uint64_t stream_seed) {
    const QuerySampler sampler(q, law);
    std::vector<MomentSums> parts(kMcChunks);
    parallel_for(kMcChunks, [&](std::size_t c) {
        Rng rng = make_rng(stream_seed, c);
        const std::size_t lo = samples * c / kMcChunks, hi = samples * (c + 1) / kMcChunks;
        MomentSums s;
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = sampler(rng);
            s.sum += v;
            s.sum_sq += v * v;
        }
        parts[c] = s;
    });
    MomentSums tot;
    for (const auto& p : parts) {
        tot.sum += p.sum;
        tot.sum_sq += p.sum_sq;
    }
    OracleAnswer a;
    const double ns = static_cast<double>(samples);
    a.samples = samples;
    a.value = tot.sum / ns;
    const double var = samples > 1 ? std::max(0.0, (tot.sum_sq - ns * a.value * a.value) / (ns - 1.0)) : 0.0;
    a.stderr_ = std::sqrt(var / ns);
    return a;
}

}  // namespace detail

/// If the planted and null expectations differ by at most tau, answers the
/// null value (a legal STAT(tau) answer); otherwise the planted value, flagged.
inline OracleAnswer adversarial_oracle(const Query& q, double tau, const Planted& planted) {
    if (!(tau > 0.0)) throw ContractViolation("adversarial_oracle: tau must be positive");
    const double null_value = query_value(q, NullLaw{static_cast<int>(planted.n())});
    const double planted_value = query_value(q, planted);
    OracleAnswer a;
    if (std::abs(planted_value - null_value) <= tau) {
        a.value = null_value;
    } else {
        a.value = planted_value;
        a.detected = true;
    }
    return a;
}

/// A STAT(tau) oracle backed by `law`. Query i (0-based, in order of asking)
/// draws Monte Carlo samples from stream derive_seed(seed, i).
class StatOracle {
public:
    StatOracle(OracleConfig cfg, Law law) : cfg_(cfg), law_(std::move(law)) {
        if (!(cfg_.tau > 0.0)) throw ContractViolation("StatOracle: tau must be positive");
        if (cfg_.mode == OracleMode::honest_mc && cfg_.samples < 2) throw ContractViolation("StatOracle: honest-mc needs samples >= 2");
    }

    const OracleConfig& config() const { return cfg_; }
    const Law& law() const { return law_; }
    std::size_t queries_asked() const { return asked_; }

    OracleAnswer ask(const Query& q) {
        const std::size_t index = asked_++;
        switch (cfg_.mode) {
            case OracleMode::honest_exact: {
                OracleAnswer a;
                a.value = query_value(q, law_);
                return a;
            }
            case OracleMode::honest_mc: {
                const double sd = detail::query_sd_bound(q, law_);
                const double required = std::ceil(16.0 * sd * sd / (cfg_.tau * cfg_.tau));
                if (cfg_.enforce_budget && !(static_cast<double>(cfg_.samples) >= required)) {
                    std::ostringstream msg;
                    msg << "honest-mc budget: " << cfg_.samples << " samples give a 4-sigma half-width above tau = " << cfg_.tau
                        << "; need " << required << " (sd bound " << sd << ")";
                    throw BudgetError(msg.str());
                }
                auto a = detail::monte_carlo(q, law_, cfg_.samples, derive_seed(cfg_.seed, index));
                a.required_samples = required;
                return a;
            }
            case OracleMode::adversarial_null: {
                if (const auto* p = std::get_if<Planted>(&law_)) return adversarial_oracle(q, cfg_.tau, *p);
                OracleAnswer a;
                a.value = query_value(q, law_);
                return a;
            }
        }
        throw ContractViolation("StatOracle: unknown mode");
    }

private:
    OracleConfig cfg_;
    Law law_;
    std::size_t asked_ = 0;
};

inline OracleAnswer stat_oracle(const Query& q, const OracleConfig& cfg, const Law& law) {
    StatOracle o(cfg, law);
    return o.ask(q);
}

// -- the single-query distinguisher ------------------------------------------------------

enum class Hypothesis { H0, H1 };

inline std::string to_string(Hypothesis h) { return h == Hypothesis::H0 ? "H0" : "H1"; }

struct Decision {
    Hypothesis verdict = Hypothesis::H0;
    double statistic = 0.0;  // oracle answer v
    double threshold = 0.0;  // n^{-(d+2)/4} / 2
    double center = 0.0;     // c0 = E_{N_n}[F]
    double clip = kInf;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"verdict", to_string(verdict)}, {"statistic", statistic}, {"threshold", threshold}, {"center", center}};
        if (std::isfinite(clip)) j["clip"] = clip;
        return j;
    }
};

/// n^{-(d+2)/4}: the tolerance scale of the radial query.
inline double distinguisher_scale(int n, int d) { return std::pow(static_cast<double>(n), -(d + 2) / 4.0); }

struct ClipChoice {
    double clip = kInf;
    ClipAccounting null_side;
    ClipAccounting planted_side;
};

inline ClipChoice clip_report(int n, int d, double clip) {
    const auto inst = momentmatch::appendix_d_instance(n, d);
    const int k = (d + 2) / 2;
    return {clip, clip_accounting(Univariate::standard_normal(), n, k, clip), clip_accounting(inst.law, n, k, clip)};
}

/// Smallest M (to 1e-4) whose clip-correction bound is at most n^{-(d+2)/4}/8
/// under both N_n and the explicit moment-matched instance. The bound
/// decreases in M, so the search is a doubling bracket plus bisection.
inline ClipChoice default_clip_level(int n, int d) {
    const double target = distinguisher_scale(n, d) / 8.0;
    const auto inst = momentmatch::appendix_d_instance(n, d);
    const int k = (d + 2) / 2;
    const auto null_a = Univariate::standard_normal();
    auto ok = [&](double m) {
        return clip_accounting(null_a, n, k, m).bound <= target && clip_accounting(inst.law, n, k, m).bound <= target;
    };
    double hi = 1.0;
    while (!ok(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw ConfigError("default_clip_level: no clip level meets the tail target");
    }
    double lo = hi / 2.0;
    if (ok(lo)) lo = 0.0;
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return {hi, clip_accounting(null_a, n, k, hi), clip_accounting(inst.law, n, k, hi)};
}

inline RadialHermiteQuery distinguisher_query(int d, double clip) { return {(d + 2) / 2, clip}; }

/// Recentered rule: H1 iff |v - c0| >= n^{-(d+2)/4} / 2.
inline Decision decide_radial(int n, int d, double clip, double answer) {
    Decision dec;
    dec.clip = clip;
    dec.threshold = distinguisher_scale(n, d) / 2.0;
    dec.center = query_value(distinguisher_query(d, clip), NullLaw{n});
    dec.statistic = answer;
    dec.verdict = std::abs(answer - dec.center) >= dec.threshold ? Hypothesis::H1 : Hypothesis::H0;
    return dec;
}

inline void validate_distinguisher(double tau, int n, int d, double clip) {
    if (d < 2 || d % 2 != 0) throw ContractViolation("distinguisher: d must be even and >= 2");
    if (n < 3) throw ContractViolation("distinguisher: n must be >= 3");
    const double scale = distinguisher_scale(n, d);
    if (!(tau <= scale / 4.0 * (1.0 + 1e-12)))
        throw ContractViolation("distinguisher: oracle tolerance must be at most n^{-(d+2)/4}/4");
    if (std::isfinite(clip)) {
        const auto rep = clip_report(n, d, clip);
        const double worst = std::max(rep.null_side.bound, rep.planted_side.bound);
        if (worst > scale / 8.0) {
            std::ostringstream msg;
            msg << "distinguisher: clip correction bound " << worst << " exceeds n^{-(d+2)/4}/8 = " << scale / 8.0
                << " at M = " << clip << "; increase the clip level";
            throw ConfigError(msg.str());
        }
    }
}

inline Decision appendix_d_distinguisher(StatOracle& oracle, int n, int d, double clip) {
    if (dimension(oracle.law()) != n) throw ContractViolation("distinguisher: oracle dimension differs from n");
    validate_distinguisher(oracle.config().tau, n, d, clip);
    const auto answer = oracle.ask(distinguisher_query(d, clip));
    return decide_radial(n, d, clip, answer.value);
}

// -- Fourier decomposition ------------------------------------------------------------

struct FourierCheck {
    double direct = 0.0;    // E_{P_v^A}[f]
    double expansion = 0.0; // sum_k <v^{(x)k} A_k, T_k>
    double deviation = 0.0;
};

/// Both sides of E_{P_v^A}[f] = sum_{k <= l} <V^{(x)k} A_k, T_k> for a polynomial
/// ridge query f(x) = p(<u, x>), with T_k = c_k u^{(x)k} and c_k the normalized
/// Hermite coefficients of p. The right side uses dense tensors.
inline FourierCheck fourier_identity_check(const Univariate& a, const Eigen::VectorXd& v, const RidgeQuery& f) {
    const int n = static_cast<int>(v.size());
    detail::check_unit(f.u, n);
    detail::check_unit(v, n);
    const int deg = f.phi.polynomial_degree();
    if (deg < 0) throw ContractViolation("fourier_identity_check: f must be an unclipped polynomial ridge");
    const auto [lo, hi] = a.continuous_range();
    double support = std::max(std::abs(lo), std::abs(hi));
    for (const auto& at : a.atoms) support = std::max(support, std::abs(at.loc));
    for (const auto& g : a.gaussians)
        if (g.weight != 0.0 && !g.truncated()) support = kInf;
    if (!std::isfinite(support)) throw ContractViolation("fourier_identity_check: A must have bounded support");

    FourierCheck out;
    const Planted planted(subspace::OrthonormalFrame::from_direction(v), a);
    out.direct = dist::planted_ridge_expectation(planted, f.phi, f.u);

    Polynomial1D p;
    switch (f.phi.kind) {
        case Function1D::Kind::constant: p = Polynomial1D::monomial({f.phi.b}); break;
        case Function1D::Kind::polynomial: p = f.phi.poly; break;
        case Function1D::Kind::hermite: {
            std::vector<double> c(f.phi.order + 1, 0.0);
            c[f.phi.order] = std::exp(-0.5 * hermite::log_factorial(f.phi.order));
            p = Polynomial1D::hermite(c);
            break;
        }
        default: throw ContractViolation("fourier_identity_check: unsupported function kind");
    }
    const auto he = p.to_hermite();
    const auto b = he.coeffs();
    for (int k = 0; k < static_cast<int>(b.size()); ++k) {
        if (b[k] == 0.0) continue;
        const double ck = b[k] * std::exp(0.5 * hermite::log_factorial(k));  // He_k = sqrt(k!) h_k
        const auto t = hermite::outer_power(f.u, k, ck);
        const auto ak = hermite::outer_power(v, k, dist::uni_hermite_coeff(a, k));
        out.expansion += hermite::tensor_inner(ak, t);
    }
    out.deviation = std::abs(out.direct - out.expansion);
    return out;
}

// -- concentration over random hidden directions ---------------------------------------

/// 50 bounded ridge profiles: tanh and cos families, clipped Hermite
/// polynomials and clipped fixed polynomials, all with values in [-1, 1].
inline std::vector<Function1D> standard_ridge_battery() {
    std::vector<Function1D> out;
    for (double a : {0.5, 1.0, 2.0, 3.0, 4.0})
        for (double b : {-0.5, 0.5}) out.push_back(Function1D::tanh(a, b));
    for (double a : {0.5, 1.0, 1.5, 2.0, 3.0})
        for (double b : {0.0, 0.7}) out.push_back(Function1D::cos(a, b));
    for (int k = 1; k <= 10; ++k) out.push_back(Function1D::hermite(k).clipped(-1.0, 1.0));
    const std::vector<std::vector<double>> polys = {
        {0.0, 0.5, 0.25},        {-0.3, 0.0, 0.4},          {0.1, -0.6, 0.0, 0.2},    {0.0, 0.0, -0.5, 0.0, 0.1},
        {0.2, 0.3, -0.2, -0.1},  {0.0, 1.0, 0.0, -0.2},     {-0.5, 0.2, 0.3},         {0.0, -0.4, 0.1, 0.05, -0.02},
        {0.3, 0.0, 0.0, 0.0, -0.05, 0.0, 0.004}, {0.0, 0.7, -0.3, 0.0, 0.02}};
    for (const auto& c : polys) out.push_back(Function1D::polynomial(Polynomial1D::monomial(c)).clipped(-1.0, 1.0));
    for (double a : {1.0, 2.0, 3.0, 5.0, 8.0})
        for (double b : {-1.5, 1.5}) out.push_back(Function1D::tanh(a, b));
    return out;
}

struct ConcentrationConfig {
    std::vector<int> n_grid;
    int d = 4;
    double tau = 0.05;
    std::size_t reps = 200;
    std::uint64_t seed = 0;
};

struct ConcentrationRow {
    int n = 0;
    std::size_t query_id = 0;
    std::size_t replicate = 0;
    double gap = 0.0;
    bool exceeded = false;
};

struct ConcentrationSummary {
    int n = 0;
    double exceedance = 0.0;
    double median_gap = 0.0;
    double q90_gap = 0.0;
    double max_gap = 0.0;
};

struct ConcentrationReport {
    ConcentrationConfig config;
    std::vector<ConcentrationRow> rows;  // ordered by (n, replicate, query)
    std::vector<ConcentrationSummary> summaries;
};

/// gap(q, v) = |E_{P_v^A}[q] - E_{N_n}[q]| for every battery query (direction
/// u = e_1) and reps Haar directions v; replicate r draws v from stream
/// (seed, r). `law_for_n` supplies the hidden law at each n.
inline ConcentrationReport concentration_experiment(const ConcentrationConfig& cfg,
                                                    const std::function<Univariate(int)>& law_for_n,
                                                    const std::vector<Function1D>& battery) {
    if (cfg.n_grid.empty() || battery.empty()) throw ContractViolation("concentration_experiment: empty grid or battery");
    if (!(cfg.tau > 0.0)) throw ContractViolation("concentration_experiment: tau must be positive");
    for (const auto& f : battery)
        if (!f.unit_bounded()) throw ContractViolation("concentration_experiment: battery queries must map into [-1, 1]");
    ConcentrationReport rep;
    rep.config = cfg;
    std::vector<double> null_values(battery.size());
    for (std::size_t q = 0; q < battery.size(); ++q) null_values[q] = dist::smoothed(battery[q], 0.0, 1.0);
    for (int n : cfg.n_grid) {
        const Univariate a = law_for_n(n);
        std::vector<std::vector<double>> gaps(cfg.reps, std::vector<double>(battery.size()));
        parallel_for(cfg.reps, [&](std::size_t r) {
            Rng rng = make_rng(cfg.seed, r);
            const auto v = subspace::sample_frame(n, 1, rng);
            const double rho = v.matrix()(0, 0);  // <e_1, v>
            for (std::size_t q = 0; q < battery.size(); ++q)
                gaps[r][q] = std::abs(dist::ridge_expectation(a, battery[q], rho) - null_values[q]);
        });
        std::vector<double> all;
        std::size_t exceeded = 0;
        for (std::size_t r = 0; r < cfg.reps; ++r)
            for (std::size_t q = 0; q < battery.size(); ++q) {
                const bool ex = gaps[r][q] > cfg.tau;
                exceeded += ex;
                rep.rows.push_back({n, q, r, gaps[r][q], ex});
                all.push_back(gaps[r][q]);
            }
        std::sort(all.begin(), all.end());
        ConcentrationSummary s;
        s.n = n;
        s.exceedance = static_cast<double>(exceeded) / static_cast<double>(all.size());
        s.median_gap = subspace::detail::quantile_sorted(all, 0.5);
        s.q90_gap = subspace::detail::quantile_sorted(all, 0.9);
        s.max_gap = all.back();
        rep.summaries.push_back(s);
    }
    return rep;
}

// -- hypothesis-testing game --------------------------------------------------------------

struct GameInstance {
    Planted planted;
    Hypothesis truth = Hypothesis::H0;

    Law backing_law() const {
        if (truth == Hypothesis::H0) return NullLaw{static_cast<int>(planted.n())};
        return planted;
    }
};

struct TranscriptEntry {
    std::size_t id = 0;
    Query query;
    OracleAnswer answer;
    double null_value = 0.0;
    double planted_value = 0.0;
    double gap = 0.0;

    nlohmann::json to_json(const OracleConfig& cfg) const {
        return {{"id", id},
                {"query", query_to_json(query)},
                {"answer", answer.value},
                {"stderr", answer.stderr_},
                {"samples", answer.samples},
                {"null_value", null_value},
                {"planted_value", planted_value},
                {"gap", gap},
                {"mode", to_string(cfg.mode)},
                {"detected", answer.detected},
                {"stream_seed", derive_seed(cfg.seed, id)}};
    }
};

class Transcript {
public:
    Transcript(OracleConfig cfg, Hypothesis truth, int n) : config_(cfg), truth_(truth), n_(n) {}

    void append(TranscriptEntry e) {
        if (decision_) throw ContractViolation("Transcript: no entries after the decision");
        e.id = entries_.size();
        entries_.push_back(std::move(e));
    }
    void decide(Decision d) {
        if (decision_) throw ContractViolation("Transcript: decision already recorded");
        decision_ = d;
    }

    const OracleConfig& config() const { return config_; }
    Hypothesis truth() const { return truth_; }
    int n() const { return n_; }
    const std::vector<TranscriptEntry>& entries() const { return entries_; }
    const std::optional<Decision>& decision() const { return decision_; }
    bool correct() const { return decision_ && decision_->verdict == truth_; }

    nlohmann::json to_json() const {
        nlohmann::json j = {{"config", config_.to_json()}, {"truth", to_string(truth_)}, {"n", n_}};
        j["entries"] = nlohmann::json::array();
        for (const auto& e : entries_) j["entries"].push_back(e.to_json(config_));
        if (decision_) {
            j["decision"] = decision_->to_json();
            j["correct"] = correct();
        }
        return j;
    }

private:
    OracleConfig config_;
    Hypothesis truth_;
    int n_;
    std::vector<TranscriptEntry> entries_;
    std::optional<Decision> decision_;
};

using PolicyStep = std::variant<Query, Decision>;
using Policy = std::function<PolicyStep(const Transcript&)>;

/// Runs the policy against an oracle backed by the instance's true hypothesis;
/// each entry records the exact values under both hypotheses.
inline Transcript game_runner(const Policy& policy, const OracleConfig& cfg, const GameInstance& inst, std::size_t max_queries) {
    const int n = static_cast<int>(inst.planted.n());
    StatOracle oracle(cfg, inst.backing_law());
    Transcript t(cfg, inst.truth, n);
    while (true) {
        const PolicyStep step = policy(t);
        if (const auto* d = std::get_if<Decision>(&step)) {
            t.decide(*d);
            return t;
        }
        if (t.entries().size() >= max_queries) {
            std::ostringstream msg;
            msg << "game_runner: policy exceeded the budget of " << max_queries << " queries";
            throw BudgetError(msg.str());
        }
        const auto& q = std::get<Query>(step);
        TranscriptEntry e;
        e.query = q;
        e.answer = oracle.ask(q);
        e.null_value = query_value(q, NullLaw{n});
        e.planted_value = query_value(q, inst.planted);
        e.gap = e.planted_value - e.null_value;
        t.append(std::move(e));
    }
}

/// Reruns the game with the transcript's configuration and reports whether
/// every answer and the verdict are reproduced exactly.
inline bool replay_matches(const Transcript& t, const Policy& policy, const GameInstance& inst) {
    const auto again = game_runner(policy, t.config(), inst, t.entries().size());
    if (again.entries().size() != t.entries().size()) return false;
    for (std::size_t i = 0; i < t.entries().size(); ++i)
        if (again.entries()[i].answer.value != t.entries()[i].answer.value) return false;
    if (t.decision().has_value() != again.decision().has_value()) return false;
    return !t.decision() || t.decision()->verdict == again.decision()->verdict;
}

/// The distinguisher as a policy: one radial query, then the recentered rule.
inline Policy appendix_d_policy(int n, int d, double clip) {
    return [n, d, clip](const Transcript& t) -> PolicyStep {
        if (t.entries().empty()) {
            validate_distinguisher(t.config().tau, n, d, clip);
            return Query{distinguisher_query(d, clip)};
        }
        return decide_radial(n, d, clip, t.entries().front().answer.value);
    };
}

}  // namespace ngca::sqsim

#endif  // NGCA_SQSIM_HPP
