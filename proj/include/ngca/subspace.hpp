#ifndef NGCA_SUBSPACE_HPP
#define NGCA_SUBSPACE_HPP

// Haar frames and the correlation-moment calculus E ||V^T u||^k.

#include "ngca/errors.hpp"
#include "ngca/frame.hpp"
#include "ngca/hermite_tensor.hpp"
#include "ngca/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <variant>
#include <vector>

namespace ngca::subspace {

/// E ||V^T u||^k = E_{t ~ Beta(m/2, (n-m)/2)} t^{k/2}
///              = prod_{j < k/2} (m + 2j) / (n + 2j)   for even k.
inline double correlation_moment_exact(int n, int m, int k) {
    if (k < 0 || k % 2 != 0) throw ContractViolation("correlation_moment_exact: k must be even and non-negative");
    if (!(m >= 1 && m < n)) throw ContractViolation("correlation_moment_exact: need 1 <= m < n");
    double v = 1.0;
    for (int j = 0; j < k / 2; ++j) v *= static_cast<double>(m + 2 * j) / static_cast<double>(n + 2 * j);
    return v;
}

/// The same quantity for real k >= 0 via log-Gamma:
/// B(m/2 + k/2, (n-m)/2) / B(m/2, (n-m)/2).
inline double correlation_moment_gamma(int n, int m, double k) {
    if (!(m >= 1 && m < n) || !(k >= 0.0)) throw ContractViolation("correlation_moment_gamma: bad arguments");
    const double a = 0.5 * m, s = 0.5 * n, h = 0.5 * k;
    return std::exp(std::lgamma(a + h) + std::lgamma(s) - std::lgamma(a) - std::lgamma(s + h));
}

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t reps = 0;
};

/// ||V^T e_1||^2 for replicate r of a Haar frame sampled from stream (master, r).
inline double projected_sq_norm_replicate(int n, int m, std::uint64_t master, std::size_t r) {
    Rng rng = make_rng(master, r);
    const auto v = sample_frame(n, m, rng);
    return v.matrix().row(0).squaredNorm();
}

/// Monte Carlo E ||V^T e_1||^k for every k in `ks`, sharing the frames.
/// Replicate r uses stream (master, r); the sums are taken in replicate order.
inline std::vector<McEstimate> correlation_moments_mc(int n, int m, const std::vector<int>& ks, std::size_t reps,
                                                     std::uint64_t master) {
    if (reps < 100) throw ContractViolation("correlation_moment_mc: reps must be >= 100");
    if (!(m >= 1 && m < n)) throw ContractViolation("correlation_moment_mc: need 1 <= m < n");
    for (int k : ks)
        if (k < 0) throw ContractViolation("correlation_moment_mc: k must be non-negative");
    std::vector<double> sq(reps);
    parallel_for(reps, [&](std::size_t r) { sq[r] = projected_sq_norm_replicate(n, m, master, r); });
    std::vector<McEstimate> out;
    for (int k : ks) {
        McEstimate e;
        e.reps = reps;
        if (k == 0) {
            e.mean = 1.0;
            out.push_back(e);
            continue;
        }
        double sum = 0.0, sum_sq = 0.0;
        for (double s : sq) {
            const double v = std::pow(s, 0.5 * k);
            sum += v;
            sum_sq += v * v;
        }
        const double nr = static_cast<double>(reps);
        e.mean = sum / nr;
        const double var = std::max(0.0, (sum_sq - nr * e.mean * e.mean) / (nr - 1.0));
        e.stderr_ = std::sqrt(var / nr);
        out.push_back(e);
    }
    return out;
}

inline McEstimate correlation_moment_mc(int n, int m, int k, std::size_t reps, std::uint64_t master) {
    return correlation_moments_mc(n, m, {k}, reps, master).front();
}

/// c u^{(x)k}, kept symbolic so that large n never needs dense storage.
struct RidgeSpec {
    double c = 1.0;
    Eigen::VectorXd u;
    int k = 0;
};

using CoefficientSpec = std::variant<hermite::HermiteTensor, RidgeSpec>;

/// ||(V^T)^{(x)k} T||_2.
inline double projected_coeff_norm(const OrthonormalFrame& v, const CoefficientSpec& spec) {
    if (const auto* ridge = std::get_if<RidgeSpec>(&spec)) {
        if (ridge->u.size() != v.n()) throw ContractViolation("projected_coeff_norm: u has wrong length");
        if (ridge->k < 0) throw ContractViolation("projected_coeff_norm: k must be non-negative");
        return std::abs(ridge->c) * std::pow((v.matrix().transpose() * ridge->u).norm(), ridge->k);
    }
    const auto& t = std::get<hermite::HermiteTensor>(spec);
    if (static_cast<Eigen::Index>(t.dim()) != v.n()) throw ContractViolation("projected_coeff_norm: tensor dimension differs from n");
    return hermite::tensor_norm(hermite::apply_linear(v.matrix().transpose(), t));
}

struct LowRankReport {
    double lhs_mean = 0.0;   // E_V ||(V^T)^{(x)k} T||^a
    double lhs_stderr = 0.0;
    double rhs = 0.0;        // E ||V^T u||^{ak/2} ||T||^a
    bool holds = false;      // lhs <= rhs + 3 stderr
    std::size_t reps = 0;
};

inline LowRankReport low_rank_moment_check(int n, int m, int k, int a, const hermite::HermiteTensor& t, std::size_t reps,
                                           std::uint64_t master) {
    if (a < 0 || a % 2 != 0) throw ContractViolation("low_rank_moment_check: a must be even");
    if (reps < 10000) throw ContractViolation("low_rank_moment_check: reps must be >= 1e4");
    if (static_cast<int>(t.dim()) != n || static_cast<int>(t.order()) != k)
        throw ContractViolation("low_rank_moment_check: tensor shape differs from (n, k)");
    if (hermite::checked_power(n, k, 100000) == 0) throw ResourceError("low_rank_moment_check: n^k exceeds 1e5");
    std::vector<double> vals(reps);
    parallel_for(reps, [&](std::size_t r) {
        Rng rng = make_rng(master, r);
        const auto v = sample_frame(n, m, rng);
        vals[r] = std::pow(projected_coeff_norm(v, t), a);
    });
    LowRankReport rep;
    rep.reps = reps;
    const double nr = static_cast<double>(reps);
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / nr;
    double ss = 0.0;
    for (double x : vals) ss += (x - mean) * (x - mean);
    rep.lhs_mean = mean;
    rep.lhs_stderr = std::sqrt(ss / (nr - 1.0) / nr);
    const double norm_a = std::pow(hermite::tensor_norm(t), a);
    rep.rhs = (a * k) % 4 == 0 ? correlation_moment_exact(n, m, a * k / 2) * norm_a
                               : correlation_moment_gamma(n, m, 0.5 * a * k) * norm_a;
    rep.holds = rep.lhs_mean <= rep.rhs + 3.0 * rep.lhs_stderr;
    return rep;
}

// -- regularized incomplete beta --------------------------------------------------

namespace detail {

// Continued fraction for I_x(a, b) by the modified Lentz method.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw IllConditionedError("incomplete beta: continued fraction did not converge", std::numeric_limits<double>::infinity());
}

}  // namespace detail

/// log I_x(a, b); stays finite where I_x itself underflows.
inline double log_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0) || !(x >= 0.0 && x <= 1.0)) throw ContractViolation("incomplete beta: bad arguments");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    if (x == 1.0) return 0.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) return log_front + std::log(detail::beta_continued_fraction(a, b, x)) - std::log(a);
    return std::log1p(-std::exp(log_front) * detail::beta_continued_fraction(b, a, 1.0 - x) / b);
}

inline double incomplete_beta(double a, double b, double x) { return std::exp(log_incomplete_beta(a, b, x)); }

/// Fraction of the unit sphere in R^n within polar angle phi of a pole:
/// I_{sin^2 phi}((n-1)/2, 1/2).
inline double spherical_cap_ratio(int n, double phi) {
    if (n < 2) throw ContractViolation("spherical_cap_ratio: n must be >= 2");
    if (!(phi > 0.0 && phi <= std::numbers::pi / 2)) throw ContractViolation("spherical_cap_ratio: phi must be in (0, pi/2]");
    const double s = std::sin(phi);
    return incomplete_beta(0.5 * (n - 1), 0.5, std::min(1.0, s * s));
}

inline double log_spherical_cap_ratio(int n, double phi) {
    if (n < 2) throw ContractViolation("spherical_cap_ratio: n must be >= 2");
    if (!(phi > 0.0 && phi <= std::numbers::pi / 2)) throw ContractViolation("spherical_cap_ratio: phi must be in (0, pi/2]");
    const double s = std::sin(phi);
    return log_incomplete_beta(0.5 * (n - 1), 0.5, std::min(1.0, s * s));
}

// -- decay experiment ---------------------------------------------------------------

struct DecayConfig {
    std::vector<int> n_grid;
    int m = 1;
    std::vector<int> k_list;
    double c = 1.0;  // ridge coefficient; u = e_1 by rotation invariance
    std::size_t reps = 500;
    std::uint64_t seed = 0;
};

struct DecayCell {
    int n = 0;
    int k = 0;
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

struct DecayStats {
    DecayConfig config;
    std::vector<DecayCell> cells;           // ordered by (k, n) as in the config
    std::vector<std::pair<int, double>> slopes;  // (k, slope of log median vs log n)

    double slope(int k) const {
        for (const auto& [kk, s] : slopes)
            if (kk == k) return s;
        throw ContractViolation("DecayStats: k not in experiment");
    }
    const DecayCell& cell(int n, int k) const {
        for (const auto& c : cells)
            if (c.n == n && c.k == k) return c;
        throw ContractViolation("DecayStats: (n, k) not in experiment");
    }
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& s, double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace detail

/// Replicate r at every n uses stream (seed, r), so the frames for different n
/// share their leading Gaussian draws (common random numbers).
inline DecayStats decay_experiment(const DecayConfig& cfg) {
    if (cfg.n_grid.empty() || cfg.k_list.empty()) throw ContractViolation("decay_experiment: empty grid");
    if (cfg.reps < 1) throw ContractViolation("decay_experiment: reps must be positive");
    for (int n : cfg.n_grid)
        if (!(cfg.m >= 1 && cfg.m < n)) throw ContractViolation("decay_experiment: need 1 <= m < n");
    for (int k : cfg.k_list)
        if (k < 0) throw ContractViolation("decay_experiment: k must be non-negative");
    DecayStats st;
    st.config = cfg;
    // ||V^T e_1|| per (n, r), then raised to each k.
    std::vector<std::vector<double>> norms(cfg.n_grid.size(), std::vector<double>(cfg.reps));
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        const int n = cfg.n_grid[i];
        parallel_for(cfg.reps, [&](std::size_t r) {
            Rng rng = make_rng(cfg.seed, r);
            const auto v = sample_frame(n, cfg.m, rng);
            Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
            u(0) = 1.0;
            norms[i][r] = projected_coeff_norm(v, RidgeSpec{1.0, u, 1});
        });
    }
    for (int k : cfg.k_list) {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
            DecayCell cell;
            cell.n = cfg.n_grid[i];
            cell.k = k;
            for (std::size_t r = 0; r < cfg.reps; ++r) {
                cell.values.push_back(std::abs(cfg.c) * std::pow(norms[i][r], k));
                cell.seeds.push_back(derive_seed(cfg.seed, r));
            }
            auto sorted = cell.values;
            std::sort(sorted.begin(), sorted.end());
            cell.median = detail::quantile_sorted(sorted, 0.5);
            cell.q1 = detail::quantile_sorted(sorted, 0.25);
            cell.q3 = detail::quantile_sorted(sorted, 0.75);
            lx.push_back(std::log(static_cast<double>(cell.n)));
            ly.push_back(std::log(cell.median));
            st.cells.push_back(std::move(cell));
        }
        st.slopes.emplace_back(k, cfg.n_grid.size() >= 2 ? detail::least_squares_slope(lx, ly) : 0.0);
    }
    return st;
}

}  // namespace ngca::subspace

#endif  // NGCA_SUBSPACE_HPP
