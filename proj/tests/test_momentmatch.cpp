#include "ngca/momentmatch.hpp"
#include "ngca/rng.hpp"

#include <catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace ngca;
using namespace ngca::momentmatch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

// Monomial Gram system int_{-C}^{C} x^{t+j} dx solved by Gaussian elimination in 50 digits.
std::vector<double> wide_monomial_solve(const MomentTargets& tg) {
    const int n = tg.degree + 1;
    std::vector<std::vector<Wide>> g(n, std::vector<Wide>(n + 1));
    const Wide c = tg.half_width;
    for (int t = 0; t < n; ++t) {
        for (int j = 0; j < n; ++j)
            g[t][j] = (t + j) % 2 ? Wide(0) : Wide(2) * boost::multiprecision::pow(c, t + j + 1) / (t + j + 1);
        g[t][n] = tg.a[t];
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (abs(g[r][col]) > abs(g[piv][col])) piv = r;
        std::swap(g[col], g[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == col || g[r][col] == 0) continue;
            const Wide f = g[r][col] / g[col][col];
            for (int k = col; k <= n; ++k) g[r][k] -= f * g[col][k];
        }
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = static_cast<double>(g[i][n] / g[i][i]);
    return out;
}

// int_{-C}^{C} p(x) x^t dx with a fine Gauss-Legendre rule evaluated on p's values.
double quad_moment(const hermite::Polynomial1D& p, double c, int t) {
    const auto& rule = gauss_legendre(40);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = c * rule.nodes[i];
        acc += c * rule.weights[i] * p(x) * std::pow(x, t);
    }
    return acc;
}

double gaussian_raw_moment(int j) { return j % 2 ? 0.0 : hermite::gaussian_moment(j); }

void require_moments_match(const dist::Univariate& a, int d, double tol) {
    for (int j = 1; j <= d; ++j) {
        INFO("moment " << j);
        CHECK_THAT(dist::uni_moment(a, j), WithinAbs(gaussian_raw_moment(j), tol));
    }
}

}  // namespace

TEST_CASE("solve_correction hand-solved examples", "[momentmatch]") {
    SECTION("all-zero targets give p = 0") {
        for (int d : {0, 3, 8, 16}) {
            const auto rep = solve_correction({1.0, d, std::vector<double>(d + 1, 0.0)});
            for (double c : rep.poly.coeffs()) CHECK(c == 0.0);
        }
    }
    SECTION("d = 2 even block") {
        for (double a2 : {1.0, -0.37, 1e-3}) {
            const auto rep = solve_correction({1.0, 2, {0.0, 0.0, a2}});
            const auto c = rep.poly.coeffs();
            const double c2 = 45.0 / 8.0 * a2;
            CHECK_THAT(c[2], WithinRel(c2, 1e-13));
            CHECK_THAT(c[0], WithinRel(-c2 / 3.0, 1e-13));
            CHECK(c[1] == 0.0);
        }
    }
    SECTION("d = 1 odd constraint") {
        const auto rep = solve_correction({1.0, 1, {0.0, 0.8}});
        const auto c = rep.poly.coeffs();
        CHECK(c[0] == 0.0);
        CHECK_THAT(c[1], WithinRel(1.5 * 0.8, 1e-14));
    }
}

TEST_CASE("solve_correction matches a 50-digit monomial solve", "[momentmatch]") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> width(0.5, 3.0);
    for (int d = 0; d <= 16; ++d) {
        for (int rep = 0; rep < 3; ++rep) {
            MomentTargets tg{width(rng), d, {}};
            for (int t = 0; t <= d; ++t) tg.a.push_back(g(rng) * std::pow(tg.half_width, t + 1));
            const auto sol = solve_correction(tg);
            const auto ref = wide_monomial_solve(tg);
            const auto c = sol.poly.coeffs();
            REQUIRE(static_cast<int>(c.size()) <= d + 1);
            double scale = 0.0;
            for (int i = 0; i <= d; ++i) scale = std::max(scale, std::abs(ref[i]) * std::pow(tg.half_width, i));
            for (int i = 0; i <= d; ++i) {
                INFO("d=" << d << " C=" << tg.half_width << " i=" << i);
                const double ci = i < static_cast<int>(c.size()) ? c[i] : 0.0;
                CHECK(std::abs(ci - ref[i]) * std::pow(tg.half_width, i) <= 1e-8 * scale);
            }
            CHECK(sol.residual <= 1e-9 * std::max(1.0, scale));
            CHECK(sol.condition < 1e12);
            for (int t = 0; t <= d; ++t) {
                const double scale_t = std::max(1.0, scale) * std::pow(tg.half_width, t + 1);
                CHECK(std::abs(quad_moment(sol.poly, tg.half_width, t) - tg.a[t]) <= 1e-9 * scale_t);
            }
        }
    }
}

TEST_CASE("solve_correction residual and sup on unit targets", "[momentmatch]") {
    for (int d = 2; d <= 16; ++d) {
        MomentTargets tg{1.0, d, std::vector<double>(d + 1, 0.0)};
        for (int t = 1; t <= d; ++t) tg.a[t] = gaussian_raw_moment(t);
        // rescale to the constructors' regime, sup|p| = 1/10
        const double s = 0.1 / solve_correction(tg).sup_p;
        for (auto& v : tg.a) v *= s;
        const auto sol = solve_correction(tg);
        CHECK(sol.residual <= 1e-9);
        double grid_sup = 0.0;
        for (int i = 0; i <= 20000; ++i) grid_sup = std::max(grid_sup, std::abs(sol.poly(-1.0 + i * 1e-4)));
        CHECK(sol.sup_p >= grid_sup);
        CHECK(sol.sup_p <= grid_sup * (1.0 + 1e-6));
    }
}

TEST_CASE("solve_correction rejects bad input", "[momentmatch]") {
    CHECK_THROWS_AS(solve_correction({1.0, 17, std::vector<double>(18, 0.0)}), ContractViolation);
    CHECK_THROWS_AS(solve_correction({0.0, 2, {0, 0, 0}}), ContractViolation);
    CHECK_THROWS_AS(solve_correction({1.0, 2, {0, 0}}), ContractViolation);
    CHECK_THROWS_AS(solve_correction({1.0, 1, {0, std::nan("")}}), ContractViolation);
    CHECK_THROWS_AS(solve_correction({1.0, 2, {0, 0, 1}}, {0, 0, 1}), ContractViolation);
}

TEST_CASE("uniqueness: permuted constraint order gives the same polynomial", "[momentmatch][property]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int d = 1; d <= 16; ++d) {
        MomentTargets tg{1.0 + 0.1 * d, d, {}};
        for (int t = 0; t <= d; ++t) tg.a.push_back(g(rng));
        std::vector<int> order(d + 1);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const auto ra = solve_correction(tg);
        const auto rb = solve_correction(tg, order);
        const auto a = ra.poly.coeffs();
        const auto b = rb.poly.coeffs();
        REQUIRE(a.size() == b.size());
        double scale = 0.0;
        for (double v : a) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("parity: zero odd targets give exactly zero odd coefficients", "[momentmatch][property]") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    for (int d = 1; d <= 16; ++d) {
        MomentTargets tg{0.7 + 0.2 * d, d, std::vector<double>(d + 1, 0.0)};
        for (int t = 0; t <= d; t += 2) tg.a[t] = g(rng);
        const auto rep = solve_correction(tg);
        const auto c = rep.poly.coeffs();
        for (std::size_t i = 1; i < c.size(); i += 2) CHECK(c[i] == 0.0);
    }
}

TEST_CASE("appendix_d_instance at n = 64, d = 2", "[momentmatch]") {
    const auto c = appendix_d_instance(64, 2);
    const double eps = 1.0 / (64.0 * 64.0);
    REQUIRE(c.law.atoms.size() == 2);
    for (const auto& at : c.law.atoms) {
        CHECK(std::abs(at.loc) == 8.0);
        CHECK_THAT(at.mass, WithinRel(eps, 1e-15));
    }
    CHECK_THAT(c.law.gaussians.at(0).weight, WithinRel(1.0 - 2.0 * eps, 1e-15));
    // a_2 = 2 eps (1 - 64)
    CHECK_THAT(momentmatch::detail::patch_moment(c.solve.poly, 1.0, 2), WithinRel(2.0 * eps * (1.0 - 64.0), 1e-12));
    CHECK_THAT(momentmatch::detail::patch_moment(c.solve.poly, 1.0, 0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(dist::uni_moment(c.law, 0), WithinAbs(1.0, 1e-12));
    require_moments_match(c.law, 2, 1e-8);
    CHECK(dist::uni_moment(c.law, 4) - 3.0 >= 1.0);
    CHECK(c.min_density >= 0.0);
    CHECK(dist::check_invariants(c.law).ok);
}

TEST_CASE("appendix_d_instance moments across (n, d)", "[momentmatch]") {
    for (auto [n, d] : std::vector<std::pair<double, int>>{{64, 2}, {256, 4}, {1024, 4}, {4096, 6}, {1 << 14, 8}}) {
        INFO("n=" << n << " d=" << d);
        const auto c = appendix_d_instance(n, d);
        require_moments_match(c.law, d, 1e-8);
        CHECK(dist::uni_moment(c.law, d + 2) - hermite::gaussian_moment(d + 2) >= 1.0);
        CHECK(c.nu <= 1e-7);
        CHECK(c.min_density >= 0.0);
        // independent non-negativity scan of the full density on [-1, 1]
        double low = 1e300;
        for (int i = 0; i <= 100000; ++i) low = std::min(low, c.law.continuous_density(-1.0 + i * 2e-5));
        CHECK(low >= 0.0);
    }
}

TEST_CASE("appendix_d_instance infeasible n reports a feasible doubling", "[momentmatch]") {
    try {
        appendix_d_instance(2, 2);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        const double hint = e.hint;
        CHECK(hint > 2.0);
        CHECK(hint <= 64.0);
        CHECK_NOTHROW(appendix_d_instance(hint, 2));
        CHECK_THROWS_AS(appendix_d_instance(hint / 2.0, 2), InfeasibleError);
    }
    CHECK_THROWS_AS(appendix_d_instance(64, 3), ContractViolation);
}

TEST_CASE("ac_instance given alpha", "[momentmatch]") {
    for (int d : {2, 4, 8}) {
        const auto c = ac_instance(d, AlphaMode::maximize);
        const double alpha = 0.5 * c.alpha;
        const auto g = ac_instance(d, AlphaMode::given, alpha);
        INFO("d=" << d);
        REQUIRE(g.law.atoms.size() == 1);
        CHECK(g.law.atoms[0].loc == 0.0);
        CHECK(g.law.atoms[0].mass == alpha);
        require_moments_match(g.law, d, 1e-8);
        CHECK(g.solve.sup_p <= 0.1);
        const double low = momentmatch::detail::minimize_on_interval(
            [&](double x) { return normal_pdf(x) + g.solve.poly(x); }, -1.0, 1.0).value;
        CHECK(low >= normal_pdf(1.0) - 0.1);
        CHECK(low > 0.0);
        CHECK(g.nu <= 1e-7);
    }
    CHECK_THROWS_AS(ac_instance(4, AlphaMode::given, 0.9), InfeasibleError);
    CHECK_THROWS_AS(ac_instance(17, AlphaMode::maximize), ContractViolation);
}

TEST_CASE("ac_instance maximize hits the sup bound", "[momentmatch]") {
    for (int d = 1; d <= 16; ++d) {
        INFO("d=" << d);
        const auto c = ac_instance(d, AlphaMode::maximize);
        CHECK(c.solve.sup_p <= 0.1);
        if (c.alpha * (1.0 + 2e-6) < 1.0)
            CHECK_THROWS_AS(ac_instance(d, AlphaMode::given, c.alpha * (1.0 + 2e-6)), InfeasibleError);
        else
            CHECK(d == 1);  // odd Gaussian moments vanish, so p = 0 for every alpha
        require_moments_match(c.law, d, 1e-8);
        CHECK(c.nu <= 1e-7);
        // atom at zero with mass exactly alpha
        REQUIRE(c.law.atoms.size() == 1);
        CHECK(c.law.atoms[0].loc == 0.0);
        CHECK(c.law.atoms[0].mass == c.alpha);
    }
}

TEST_CASE("decodable_instance", "[momentmatch]") {
    SECTION("mu = 0 gives p = 0") {
        const auto c = decodable_with_mu(4, 0.05, 1.0, 0.0);
        for (double v : c.solve.poly.coeffs()) CHECK(v == 0.0);
        CHECK(c.nu == 0.0);
    }
    SECTION("moments and scaling for d = 4") {
        std::vector<double> ratios;
        for (double alpha : {0.05, 0.02, 0.01}) {
            const auto c = decodable_instance(4, alpha, 1.0);
            INFO("alpha=" << alpha << " mu=" << c.mu);
            require_moments_match(c.law, 4, 1e-8);
            CHECK(c.min_density >= 0.0);
            CHECK(c.nu <= 1e-7);
            CHECK(c.mu >= 0.1);
            ratios.push_back(c.mu * std::pow(alpha, 0.25));
            CHECK(c.report_json().contains("mu_alpha_scaling"));
        }
        const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        CHECK(*hi / *lo <= 4.0);
    }
    SECTION("the search lands on the feasibility boundary") {
        const auto c = decodable_instance(2, 0.1, 1.0);
        CHECK(c.min_density >= 0.0);
        CHECK(momentmatch::detail::decodable_build(2, 0.1, 1.0, c.mu + 1e-5).min_density < 0.0);
    }
}

TEST_CASE("verify_moment_match", "[momentmatch]") {
    for (int d : {1, 4, 16, 32}) CHECK(verify_moment_match(dist::Univariate::standard_normal(), d) == 0.0);
    for (double mu : {0.3, -1.7}) CHECK_THAT(verify_moment_match(dist::Univariate::normal(mu, 1.0), 1), WithinRel(std::abs(mu), 1e-13));
    CHECK_THROWS_AS(verify_moment_match(dist::Univariate::standard_normal(), 33), ContractViolation);
}

TEST_CASE("verify_moment_match dominates random unit polynomials", "[momentmatch][property]") {
    const auto law = dist::mixture({{0.4, dist::Univariate::normal(0.5, 0.8)}, {0.6, dist::Univariate::normal(-0.2, 1.1)}});
    const int d = 5;
    const double nu = verify_moment_match(law, d);
    // E_A f - E_N f for f = sum_k c_k h_k, evaluated from raw moments of A.
    auto gap = [&](const std::vector<double>& c) {
        std::vector<double> hc(d + 1, 0.0);
        for (int k = 1; k <= d; ++k) hc[k] = c[k - 1] * std::exp(-0.5 * hermite::log_factorial(k));  // He_k basis
        const auto mono = hermite::Polynomial1D::hermite(hc).to_monomial();
        return dist::uni_expectation(law, mono) - dist::uni_expectation(dist::Univariate::standard_normal(), mono);
    };
    Rng rng = make_rng(99, 0);
    std::normal_distribution<double> g;
    for (int i = 0; i < 10000; ++i) {
        std::vector<double> c(d);
        double s = 0.0;
        for (auto& v : c) {
            v = g(rng);
            s += v * v;
        }
        for (auto& v : c) v /= std::sqrt(s);
        CHECK(std::abs(gap(c)) <= nu + 1e-12);
    }
    std::vector<double> best(d);
    for (int k = 1; k <= d; ++k) best[k - 1] = dist::uni_hermite_coeff(law, k) / nu;
    CHECK_THAT(gap(best), WithinAbs(nu, 1e-10));
}

TEST_CASE("nu is non-decreasing in d", "[momentmatch][property]") {
    std::vector<dist::Univariate> laws = {appendix_d_instance(256, 4).law, ac_instance(3, AlphaMode::maximize).law,
                                          dist::Univariate::normal(0.4, 0.9)};
    for (const auto& law : laws) {
        double prev = 0.0;
        for (int d = 1; d <= 32; ++d) {
            const double nu = verify_moment_match(law, d);
            CHECK(nu >= prev);
            prev = nu;
        }
    }
}

TEST_CASE("report JSON fields", "[momentmatch]") {
    const auto c = appendix_d_instance(64, 2);
    const auto j = c.report_json();
    for (const char* key : {"residual", "sup_p", "condition", "nu"}) CHECK(j.contains(key));
    const auto a = ac_instance(2, AlphaMode::maximize).report_json();
    CHECK(a.contains("alpha"));
}
