#include "ngca/hermite.hpp"
#include "ngca/hermite_tensor.hpp"
#include "ngca/quadrature.hpp"
#include "ngca/rng.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

using namespace ngca;
using namespace ngca::hermite;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// d^k/dt^k exp(-t^2/2) = q_k(t) exp(-t^2/2) with q_{k+1} = q_k' - t q_k.
std::vector<double> derivative_formula_poly(int k) {
    std::vector<double> q{1.0};
    for (int j = 0; j < k; ++j) {
        std::vector<double> next(q.size() + 1, 0.0);
        for (std::size_t i = 1; i < q.size(); ++i) next[i - 1] += static_cast<double>(i) * q[i];
        for (std::size_t i = 0; i < q.size(); ++i) next[i + 1] -= q[i];
        q = std::move(next);
    }
    if (k % 2 == 1)
        for (double& c : q) c = -c;
    return q;
}

double horner(const std::vector<double>& c, double t) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
    return acc;
}

// Brute force over all matchings of [k] into singletons and pairs: a pair
// {a, b} contributes -delta(i_a, i_b), a singleton a contributes x_{i_a}.
double partition_entry(const std::vector<std::size_t>& idx, const Eigen::VectorXd& x) {
    const std::size_t k = idx.size();
    std::vector<bool> used(k, false);
    std::function<double(std::size_t)> rec = [&](std::size_t pos) -> double {
        while (pos < k && used[pos]) ++pos;
        if (pos == k) return 1.0;
        used[pos] = true;
        double total = x(static_cast<Eigen::Index>(idx[pos])) * rec(pos + 1);
        for (std::size_t b = pos + 1; b < k; ++b) {
            if (used[b]) continue;
            used[b] = true;
            if (idx[pos] == idx[b]) total -= rec(pos + 1);
            used[b] = false;
        }
        used[pos] = false;
        return total;
    };
    return rec(0) / std::sqrt(std::tgamma(static_cast<double>(k) + 1.0));
}

Eigen::MatrixXd random_orthonormal_rows(int m, int n, Rng& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    return q.transpose();
}

Eigen::VectorXd random_vector(int n, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

}  // namespace

TEST_CASE("he_eval small values", "[hermite]") {
    CHECK(he_eval(2, 0.0) == -1.0);
    CHECK(he_eval(3, 2.0) == 2.0);
    CHECK(he_eval(0, 123.0) == 1.0);
    CHECK(he_eval(1, -0.7) == -0.7);
}

TEST_CASE("he_eval agrees with the derivative formula", "[hermite]") {
    const auto q7 = derivative_formula_poly(7);
    // He_7 = t^7 - 21 t^5 + 105 t^3 - 105 t
    REQUIRE(q7.size() == 8);
    CHECK(q7[7] == 1.0);
    CHECK(q7[5] == -21.0);
    CHECK(q7[3] == 105.0);
    CHECK(q7[1] == -105.0);
    CHECK_THAT(he_eval(7, 1.3), WithinAbs(horner(q7, 1.3), 1e-10));
    for (int k = 0; k <= 20; ++k)
        for (double t : {-3.1, -0.4, 0.0, 0.9, 2.5}) {
            const double ref = horner(derivative_formula_poly(k), t);
            CHECK_THAT(he_eval(k, t), WithinAbs(ref, 1e-10 * std::max(1.0, std::abs(ref))));
        }
}

TEST_CASE("h_eval normalization", "[hermite]") {
    CHECK_THAT(h_eval(2, 0.0), WithinRel(-1.0 / std::sqrt(2.0), 1e-15));
    CHECK(h_eval(0, 5.5) == 1.0);
    CHECK_THAT(h_eval(4, 1.0), WithinRel(-2.0 / std::sqrt(24.0), 1e-14));
    for (int k = 0; k <= 30; ++k) {
        const double t = 1.7;
        CHECK_THAT(h_eval(k, t), WithinRel(he_eval(k, t) / std::sqrt(std::tgamma(k + 1.0)), 1e-12));
    }
    const auto all = h_all(12, 0.3);
    for (int k = 0; k <= 12; ++k) CHECK_THAT(all[k], WithinRel(h_eval(k, 0.3), 1e-15));
}

TEST_CASE("Hermite orthonormality under Gauss-Hermite quadrature", "[hermite][property]") {
    const auto& rule = gauss_hermite(220);
    double worst = 0.0;
    for (int i = 0; i <= 12; ++i)
        for (int j = 0; j <= 12; ++j) {
            double s = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                s += rule.weights[q] * h_eval(i, rule.nodes[q]) * h_eval(j, rule.nodes[q]);
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    CHECK(worst <= 1e-8);
}

TEST_CASE("Polynomial1D evaluates and converts between bases", "[hermite]") {
    const auto he4 = Polynomial1D::hermite({0, 0, 0, 0, 1});
    const auto mono = he4.to_monomial();
    REQUIRE(mono.coeffs().size() == 5);
    CHECK(mono.coeffs()[0] == 3.0);
    CHECK(mono.coeffs()[2] == -6.0);
    CHECK(mono.coeffs()[4] == 1.0);
    CHECK_THAT(he4(1.0), WithinAbs(-2.0, 1e-15));

    const auto leg = Polynomial1D::legendre({0, 0, 1}, 2.0);  // P_2(x/2) = (3x^2/4 - 1)/2
    const auto lm = leg.to_monomial();
    CHECK_THAT(lm.coeffs()[0], WithinAbs(-0.5, 1e-15));
    CHECK_THAT(lm.coeffs()[2], WithinAbs(0.375, 1e-15));
    CHECK_THAT(leg(1.0), WithinAbs(lm(1.0), 1e-15));

    CHECK_THROWS_AS(Polynomial1D::monomial({1.0, std::nan("")}), ContractViolation);
    CHECK(to_string(Basis::hermite) == "probabilist-hermite");
}

TEST_CASE("basis conversions round-trip for degree <= 20", "[hermite][property]") {
    Rng rng(20240501);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_h = 0.0, worst_l = 0.0;
    for (int trial = 0; trial < 50; ++trial)
        for (int deg = 0; deg <= 20; ++deg) {
            std::vector<double> c(deg + 1);
            for (double& v : c) v = u(rng);
            const auto p = Polynomial1D::monomial(c);
            const auto back_h = p.to_hermite().to_monomial();
            const auto back_l = p.to_legendre(1.5).to_monomial();
            // Relative to the coefficient vector's max norm.
            double scale = 0.0;
            for (double v : c) scale = std::max(scale, std::abs(v));
            for (int i = 0; i <= deg; ++i) {
                worst_h = std::max(worst_h, std::abs(back_h.coeffs()[i] - c[i]) / scale);
                worst_l = std::max(worst_l, std::abs(back_l.coeffs()[i] - c[i]) / scale);
            }
            // Values agree across bases too.
            // Hermite-series evaluation carries its own cancellation; the
            // tolerance scales with sum_l |h_l He_l(x)|.
            const auto ph = p.to_hermite();
            for (double x : {-1.2, 0.3, 1.4}) {
                const double ref = p(x);
                double cond = 0.0;
                for (int l = 0; l <= deg; ++l) cond += std::abs(ph.coeffs()[l] * he_eval(l, x));
                CHECK_THAT(ph(x), WithinAbs(ref, 1e-14 * (cond + std::abs(ref))));
                CHECK_THAT(p.to_legendre(1.5)(x), WithinAbs(ref, 1e-12 * (1.0 + std::abs(ref))));
            }
        }
    INFO("hermite round trip " << worst_h << ", legendre round trip " << worst_l);
    CHECK(worst_h <= 1e-12);
    CHECK(worst_l <= 1e-12);
}

TEST_CASE("hermite_tensor low orders", "[tensor]") {
    Eigen::VectorXd x(3);
    x << 0.5, -1.0, 2.0;
    const auto t0 = hermite_tensor(3, 0, x);
    REQUIRE(t0.size() == 1);
    CHECK(t0[0] == 1.0);
    const auto t1 = hermite_tensor(3, 1, x);
    for (int i = 0; i < 3; ++i) CHECK(t1[i] == x(i));
    Eigen::VectorXd y(2);
    y << 0.7, -1.1;
    const auto t2 = hermite_tensor(2, 2, y);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const std::vector<std::size_t> idx{i, j};
            const double ref = (y(i) * y(j) - (i == j ? 1.0 : 0.0)) / std::sqrt(2.0);
            CHECK_THAT(t2.at(idx), WithinAbs(ref, 1e-15));
        }
}

TEST_CASE("hermite_tensor matches the partition sum", "[tensor]") {
    Rng rng(11);
    for (std::size_t m = 1; m <= 3; ++m)
        for (std::size_t k = 0; k <= 5; ++k) {
            const auto x = random_vector(static_cast<int>(m), rng);
            const auto t = hermite_tensor(m, k, x);
            double worst = 0.0;
            for (std::size_t f = 0; f < t.size(); ++f) worst = std::max(worst, std::abs(t[f] - partition_entry(t.multi_index(f), x)));
            CHECK(worst <= 1e-12);
            CHECK(max_asymmetry(t) <= 1e-12);
        }
}

TEST_CASE("hermite_tensor storage budget", "[tensor]") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
    CHECK_THROWS_AS(hermite_tensor(10, 8, x), ResourceError);
    CHECK_NOTHROW(hermite_tensor(10, 7, x));
    CHECK_THROWS_AS(HermiteTensor(0, 2), ContractViolation);
}

TEST_CASE("tensor_inner examples", "[tensor]") {
    HermiteTensor z(3, 2);
    CHECK(tensor_inner(z, z) == 0.0);
    Eigen::VectorXd x(3), y(3);
    x << 1, 2, 3;
    y << -1, 0.5, 2;
    CHECK_THAT(tensor_inner(hermite_tensor(3, 1, x), hermite_tensor(3, 1, y)), WithinAbs(x.dot(y), 1e-14));
    Eigen::VectorXd two(1);
    two << 2.0;
    CHECK_THAT(tensor_inner(hermite_tensor(1, 2, two), hermite_tensor(1, 2, two)), WithinAbs(4.5, 1e-14));
    CHECK_THROWS_AS(tensor_inner(hermite_tensor(3, 1, x), hermite_tensor(3, 2, x)), ContractViolation);
}

TEST_CASE("apply_linear examples and rotation identity", "[tensor][property]") {
    Rng rng(3);
    const auto x = random_vector(4, rng);
    const auto h = hermite_tensor(4, 3, x);
    const auto same = apply_linear(Eigen::MatrixXd::Identity(4, 4), h);
    for (std::size_t f = 0; f < h.size(); ++f) CHECK_THAT(same[f], WithinAbs(h[f], 1e-15));

    // Row selector: first two coordinates.
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(2, 5);
    sel(0, 0) = 1.0;
    sel(1, 1) = 1.0;
    const auto x5 = random_vector(5, rng);
    const auto projected = apply_linear(sel, hermite_tensor(5, 2, x5));
    const auto direct = hermite_tensor(2, 2, x5.head(2));
    for (std::size_t f = 0; f < direct.size(); ++f) CHECK_THAT(projected[f], WithinAbs(direct[f], 1e-15));

    Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 4);
    CHECK_THROWS_AS(apply_linear(bad, h), ContractViolation);

    std::uniform_int_distribution<int> pick_n(1, 6);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = pick_n(rng);
        const int m = std::uniform_int_distribution<int>(1, std::min(3, n))(rng);
        const int k = std::uniform_int_distribution<int>(0, 4)(rng);
        const auto b = random_orthonormal_rows(m, n, rng);
        const auto xv = random_vector(n, rng, 1.5);
        const auto lhs = hermite_tensor(m, k, b * xv);
        const auto rhs = apply_linear(b, hermite_tensor(n, k, xv));
        for (std::size_t f = 0; f < lhs.size(); ++f) worst = std::max(worst, std::abs(lhs[f] - rhs[f]));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("tensor L2 normalization by Monte Carlo", "[tensor][property]") {
    Rng rng(99);
    std::normal_distribution<double> g;
    for (auto [m, k] : {std::pair<int, int>{2, 2}, {3, 3}, {2, 4}, {1, 4}}) {
        // Random symmetric A: symmetrize a Gaussian tensor.
        HermiteTensor a(m, k);
        HermiteTensor raw(m, k);
        for (std::size_t f = 0; f < raw.size(); ++f) raw[f] = g(rng);
        std::vector<std::size_t> perm(k);
        for (std::size_t f = 0; f < a.size(); ++f) {
            auto idx = a.multi_index(f);
            std::sort(idx.begin(), idx.end());
            double s = 0.0;
            int count = 0;
            do {
                s += raw.at(idx);
                ++count;
            } while (std::next_permutation(idx.begin(), idx.end()));
            a[f] = s / count;
        }
        const double target = tensor_inner(a, a);
        const int samples = 1'000'000;
        double mean = 0.0, m2 = 0.0;
        Eigen::VectorXd x(m);
        for (int s = 0; s < samples; ++s) {
            for (int i = 0; i < m; ++i) x(i) = g(rng);
            const double v = std::pow(tensor_inner(a, hermite_tensor(m, k, x)), 2);
            const double delta = v - mean;
            mean += delta / (s + 1);
            m2 += delta * (v - mean);
        }
        const double stderr_ = std::sqrt(m2 / (samples - 1) / samples);
        INFO("m=" << m << " k=" << k << " mc=" << mean << " exact=" << target << " se=" << stderr_);
        CHECK(std::abs(mean - target) <= 4.0 * stderr_);
    }
}

TEST_CASE("medium-k norm bound holds on a grid", "[tensor][bounds]") {
    Rng rng(5);
    for (int m = 1; m <= 3; ++m)
        for (int k = 1; k <= 8; ++k)
            for (double b : {1.0, 2.0, 4.0, 8.0})
                for (int trial = 0; trial < 5; ++trial) {
                    auto x = random_vector(m, rng);
                    x *= b * std::uniform_real_distribution<double>(0.0, 1.0)(rng) / x.norm();
                    const double norm = tensor_norm(hermite_tensor(m, k, x));
                    const double bound = std::pow(2.0, k) * std::pow(m, k / 4.0) * std::pow(b, k) * std::pow(k, -k / 2.0) *
                                         std::exp(k * (k - 1) / (2.0 * b * b));
                    CHECK(norm <= bound);
                }
}

TEST_CASE("large-k norm ratio stays bounded", "[tensor][bounds]") {
    Rng rng(8);
    double worst = 0.0;
    for (int m = 1; m <= 3; ++m) {
        const int kmax = m == 1 ? 30 : (m == 2 ? 20 : 14);  // keep m^k dense and small
        for (int k = 0; k <= kmax; ++k)
            for (double r : {0.0, 1.0, 3.0, 6.0}) {
                Eigen::VectorXd x = random_vector(m, rng);
                x *= r / std::max(x.norm(), 1e-300);
                const double norm = tensor_norm(hermite_tensor(m, k, x));
                const double binom = std::exp(std::lgamma(k + m) - std::lgamma(k + 1.0) - std::lgamma(m));
                worst = std::max(worst, norm / (std::sqrt(binom) * std::exp(x.squaredNorm() / 4.0)));
            }
    }
    INFO("measured constant " << worst);
    CHECK(std::isfinite(worst));
    CHECK(worst <= 8.0);  // 2^m for m <= 3
}

TEST_CASE("sup of h_k^2 exp(-t^2/2) decays like k^(-1/6)", "[hermite][bounds]") {
    double worst = 0.0;
    for (int k = 1; k <= 200; ++k) {
        double best = 0.0;
        const double edge = 2.0 * std::sqrt(k + 1.0) + 2.0;
        for (int i = 0; i <= 20000; ++i) {
            const double t = edge * i / 20000.0;
            const double h = h_eval(k, t);
            best = std::max(best, h * h * std::exp(-0.5 * t * t));
        }
        worst = std::max(worst, best * std::pow(k, 1.0 / 6.0));
    }
    INFO("measured constant " << worst);
    CHECK(worst < 1.0);
}
