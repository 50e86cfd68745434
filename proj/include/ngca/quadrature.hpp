#ifndef NGCA_QUADRATURE_HPP
#define NGCA_QUADRATURE_HPP

// Numerical integration used throughout the lab.
//
// * integrate(): globally adaptive Gauss-Kronrod (G7/K15) with a priority queue
//   over subintervals, QUADPACK-style error estimate. Terminates when the
//   summed error estimate is below max(abs_tol, rel_tol*|I|); the default
//   absolute tolerance is 1e-10, comfortably inside the 1e-8 budget the
//   distribution operations advertise.
// * gauss_hermite() / gauss_legendre(): Golub-Welsch rules, cached per size.
//   Hermite rules are for the probabilists' weight exp(-t^2/2)/sqrt(2 pi) and
//   their weights sum to one.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

namespace ngca {

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    double abs_sum = std::abs(kronrod);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        kronrod += kKronrodWeights[j] * (f1[j] + f2[j]);
        abs_sum += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1[j] + f2[j]);
    }
    const double mean = 0.5 * kronrod;
    double asc = kKronrodWeights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    const double result = kronrod * half;
    asc *= std::abs(half);
    abs_sum *= std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(err, 50.0 * eps * abs_sum);
    if (!std::isfinite(result)) err = std::numeric_limits<double>::infinity();
    return {a, b, result, err};
}

}  // namespace detail

/// Adaptive integral of f over [a, b] (finite endpoints).
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
    QuadResult out;
    if (a == b) return out;
    std::priority_queue<detail::Panel> heap;
    heap.push(detail::kronrod15(f, a, b));
    out.evaluations = 15;
    double value = heap.top().value;
    double error = heap.top().error;
    int intervals = 1;
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
        if (intervals >= opt.max_intervals || !std::isfinite(value)) {
            out.converged = false;
            break;
        }
        const detail::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            out.converged = false;
            heap.push(worst);
            break;
        }
        const auto left = detail::kronrod15(f, worst.a, mid);
        const auto right = detail::kronrod15(f, mid, worst.b);
        out.evaluations += 30;
        ++intervals;
        heap.push(left);
        heap.push(right);
        value += (left.value + right.value) - worst.value;
        error += (left.error + right.error) - worst.error;
    }
    // Final sums from the panels themselves, free of update drift.
    value = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = value;
    out.error = error;
    return out;
}

/// Integral over consecutive pieces [b0,b1], [b1,b2], ... so that known kinks
/// and jumps land on panel boundaries. Tolerances are split evenly.
template <class F>
QuadResult integrate_pieces(F&& f, std::span<const double> breaks, const QuadOptions& opt = {}) {
    QuadResult total;
    if (breaks.size() < 2) return total;
    QuadOptions piece = opt;
    piece.abs_tol = opt.abs_tol / static_cast<double>(breaks.size() - 1);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        const auto r = integrate(f, breaks[i], breaks[i + 1], piece);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
        total.converged = total.converged && r.converged;
    }
    return total;
}

/// Sorted, de-duplicated breakpoints restricted to [lo, hi], endpoints included.
inline std::vector<double> make_breaks(double lo, double hi, std::vector<double> interior) {
    std::vector<double> b;
    b.reserve(interior.size() + 2);
    b.push_back(lo);
    for (double x : interior)
        if (x > lo && x < hi) b.push_back(x);
    b.push_back(hi);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
inline QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                                   double mu0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
    QuadratureRule rule;
    const auto n = diag.size();
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

template <class Build>
const QuadratureRule& cached_rule(int n, Build build, std::map<int, std::unique_ptr<QuadratureRule>>& cache,
                                  std::mutex& m) {
    std::lock_guard lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<QuadratureRule>(build(n))).first;
    return *it->second;
}

}  // namespace detail

/// n-point rule for E_{t~N(0,1)}[f(t)]; exact for polynomials of degree <= 2n-1.
inline const QuadratureRule& gauss_hermite(int n) {
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    static std::mutex m;
    return detail::cached_rule(
        n,
        [](int size) {
            Eigen::VectorXd diag = Eigen::VectorXd::Zero(size);
            Eigen::VectorXd off(std::max(0, size - 1));
            for (int i = 1; i < size; ++i) off(i - 1) = std::sqrt(static_cast<double>(i));
            auto rule = detail::golub_welsch(diag, off, 1.0);
            // Eigenvector weights are only absolutely accurate; the tiny outer
            // weights need the relative accuracy of 1 / sum_j h_j(t)^2. Nodes get
            // one Newton step on h_n first (h_n' = sqrt(n) h_{n-1}).
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                auto normalized = [size](double t, double& sum_sq, double& last, double& before_last) {
                    double prev = 0.0, cur = 1.0;
                    sum_sq = 0.0;
                    for (int j = 0; j < size; ++j) {
                        sum_sq += cur * cur;
                        const double next = (t * cur - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(j + 1.0);
                        prev = cur;
                        cur = next;
                    }
                    last = cur;
                    before_last = prev;
                };
                double t = rule.nodes[i], sum_sq, hn, hn1;
                normalized(t, sum_sq, hn, hn1);
                if (hn1 != 0.0 && std::isfinite(hn)) t -= hn / (std::sqrt(static_cast<double>(size)) * hn1);
                normalized(t, sum_sq, hn, hn1);
                rule.nodes[i] = t;
                rule.weights[i] = std::isfinite(sum_sq) ? 1.0 / sum_sq : 0.0;
            }
            return rule;
        },
        cache, m);
}

/// n-point Gauss-Legendre rule on [-1, 1].
inline const QuadratureRule& gauss_legendre(int n) {
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    static std::mutex m;
    return detail::cached_rule(
        n,
        [](int size) {
            Eigen::VectorXd diag = Eigen::VectorXd::Zero(size);
            Eigen::VectorXd off(std::max(0, size - 1));
            for (int i = 1; i < size; ++i) {
                const double k = i;
                off(i - 1) = k / std::sqrt(4.0 * k * k - 1.0);
            }
            return detail::golub_welsch(diag, off, 2.0);
        },
        cache, m);
}

/// Fixed composite Gauss-Legendre over [a, b]: `panels` equal panels of
/// `order` nodes each. Used where the integrand is smooth and bounded and a
/// deterministic evaluation count matters.
template <class F>
double composite_legendre(F&& f, double a, double b, int panels, int order = 20) {
    const auto& rule = gauss_legendre(order);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double c = lo + 0.5 * width;
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + 0.5 * width * rule.nodes[i]);
        total += 0.5 * width * s;
    }
    return total;
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Pr[Z <= x] for standard normal Z, accurate in both tails.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// E[f(mean + sd * Z)] by adaptive quadrature over |Z| <= 14 (tail mass
/// below 1e-44 for bounded f).
template <class F>
QuadResult gaussian_expectation(F&& f, double mean, double sd, const QuadOptions& opt = {}) {
    if (sd == 0.0) return {f(mean), 0.0, 1, true};
    auto g = [&](double t) { return f(mean + sd * t) * normal_pdf(t); };
    static constexpr std::array<double, 7> breaks = {-14.0, -8.0, -3.0, 0.0, 3.0, 8.0, 14.0};
    return integrate_pieces(g, std::span<const double>(breaks), opt);
}

}  // namespace ngca

#endif  // NGCA_QUADRATURE_HPP
