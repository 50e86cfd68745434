#ifndef NGCA_FUNCTION1D_HPP
#define NGCA_FUNCTION1D_HPP

#include "ngca/errors.hpp"
#include "ngca/hermite.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace ngca {

/// A univariate test function phi, optionally clamped to [lo, hi].
///   constant     c
///   polynomial   p(t)
///   tanh         tanh(a t + b)
///   cos          cos(a t + b)
///   hermite      h_k(t)
struct Function1D {
    enum class Kind { constant, polynomial, tanh, cos, hermite };

    Kind kind = Kind::constant;
    double a = 1.0;
    double b = 0.0;
    int order = 0;
    hermite::Polynomial1D poly;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Function1D constant(double c) {
        Function1D f;
        f.kind = Kind::constant;
        f.b = c;
        return f;
    }
    static Function1D polynomial(hermite::Polynomial1D p) {
        Function1D f;
        f.kind = Kind::polynomial;
        f.poly = std::move(p);
        return f;
    }
    static Function1D tanh(double a, double b = 0.0) {
        Function1D f;
        f.kind = Kind::tanh;
        f.a = a;
        f.b = b;
        return f;
    }
    static Function1D cos(double a, double b = 0.0) {
        Function1D f;
        f.kind = Kind::cos;
        f.a = a;
        f.b = b;
        return f;
    }
    static Function1D hermite(int k) {
        Function1D f;
        f.kind = Kind::hermite;
        f.order = k;
        return f;
    }

    Function1D clipped(double lower, double upper) const {
        if (!(lower <= upper)) throw ContractViolation("Function1D: clip bounds out of order");
        Function1D f = *this;
        f.lo = lower;
        f.hi = upper;
        return f;
    }

    double raw(double t) const {
        switch (kind) {
            case Kind::constant: return b;
            case Kind::polynomial: return poly(t);
            case Kind::tanh: return std::tanh(a * t + b);
            case Kind::cos: return std::cos(a * t + b);
            case Kind::hermite: return hermite::h_eval(order, t);
        }
        return 0.0;
    }
    double operator()(double t) const { return std::clamp(raw(t), lo, hi); }

    bool is_clipped() const { return std::isfinite(lo) || std::isfinite(hi); }

    /// Polynomial degree when phi is an unclipped polynomial, else -1.
    int polynomial_degree() const {
        if (is_clipped()) return -1;
        switch (kind) {
            case Kind::constant: return 0;
            case Kind::polynomial: return poly.degree();
            case Kind::hermite: return order;
            default: return -1;
        }
    }

    /// Points in (from, to) where the clamp switches on or off.
    std::vector<double> kinks(double from, double to) const {
        std::vector<double> out;
        if (!is_clipped() || !(to > from)) return out;
        auto keep = [&](double t) {
            if (t > from && t < to) out.push_back(t);
        };
        for (double level : {lo, hi}) {
            if (!std::isfinite(level)) continue;
            switch (kind) {
                case Kind::constant: break;
                case Kind::tanh:
                    if (std::abs(level) < 1.0 && a != 0.0) keep((std::atanh(level) - b) / a);
                    break;
                case Kind::cos: {
                    if (std::abs(level) > 1.0 || a == 0.0) break;
                    const double base = std::acos(level);
                    const double period = 2.0 * std::numbers::pi / std::abs(a);
                    for (double root : {base, -base}) {
                        const double t0 = (root - b) / a;
                        const double first = t0 + std::ceil((from - t0) / period) * period;
                        for (double t = first; t < to; t += period) keep(t);
                    }
                    break;
                }
                case Kind::polynomial:
                case Kind::hermite: {
                    // Real roots of p - level from the companion matrix, polished by Newton.
                    const auto mono = (kind == Kind::polynomial ? poly : hermite::Polynomial1D::hermite([&] {
                        std::vector<double> c(order + 1, 0.0);
                        c[order] = std::exp(-0.5 * hermite::log_factorial(order));
                        return c;
                    }())).to_monomial();
                    std::vector<double> c(mono.coeffs().begin(), mono.coeffs().end());
                    c[0] -= level;
                    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
                    const int deg = static_cast<int>(c.size()) - 1;
                    if (deg < 1) break;
                    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
                    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
                    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
                    const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();
                    auto value = [&](double t, double& deriv) {
                        double v = 0.0;
                        deriv = 0.0;
                        for (int i = deg; i >= 0; --i) {
                            deriv = deriv * t + v;
                            v = v * t + c[i];
                        }
                        return v;
                    };
                    for (Eigen::Index i = 0; i < roots.size(); ++i) {
                        if (std::abs(roots(i).imag()) > 1e-6 * (1.0 + std::abs(roots(i).real()))) continue;
                        double t = roots(i).real(), d;
                        for (int it = 0; it < 3; ++it) {
                            const double v = value(t, d);
                            if (d == 0.0) break;
                            t -= v / d;
                        }
                        keep(t);
                    }
                    break;
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// sup |phi| is finite.
    bool bounded() const {
        if (std::isfinite(lo) && std::isfinite(hi)) return true;
        return kind == Kind::constant || kind == Kind::tanh || kind == Kind::cos;
    }

    /// Values lie in [-1, 1].
    bool unit_bounded() const {
        double top = hi, bottom = lo;
        if (kind == Kind::tanh || kind == Kind::cos) {
            top = std::min(top, 1.0);
            bottom = std::max(bottom, -1.0);
        }
        if (kind == Kind::constant) top = bottom = std::clamp(b, lo, hi);
        return top <= 1.0 && bottom >= -1.0;
    }
};

inline std::string to_string(Function1D::Kind k) {
    switch (k) {
        case Function1D::Kind::constant: return "constant";
        case Function1D::Kind::polynomial: return "polynomial";
        case Function1D::Kind::tanh: return "tanh";
        case Function1D::Kind::cos: return "cos";
        case Function1D::Kind::hermite: return "hermite";
    }
    return "?";
}

inline nlohmann::json to_json(const Function1D& f) {
    nlohmann::json j = {{"kind", to_string(f.kind)}};
    switch (f.kind) {
        case Function1D::Kind::constant: j["value"] = f.b; break;
        case Function1D::Kind::polynomial: {
            const auto mono = f.poly.to_monomial();
            const auto c = mono.coeffs();
            j["coeffs_monomial"] = std::vector<double>(c.begin(), c.end());
            break;
        }
        case Function1D::Kind::tanh:
        case Function1D::Kind::cos:
            j["a"] = f.a;
            j["b"] = f.b;
            break;
        case Function1D::Kind::hermite: j["order"] = f.order; break;
    }
    if (std::isfinite(f.lo)) j["lo"] = f.lo;
    if (std::isfinite(f.hi)) j["hi"] = f.hi;
    return j;
}

}  // namespace ngca

#endif  // NGCA_FUNCTION1D_HPP
