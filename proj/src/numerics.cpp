#include "rkflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rkflow::numerics {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

Bracket Bracket::from(const std::function<double(double)>& f, double lo, double hi) {
    if (!(lo < hi)) {
        throw bracketing_error("bracket: lo must be < hi");
    }
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo * f_hi > 0.0) {
        std::ostringstream msg;
        msg << "bracket: no sign change on [" << lo << ", " << hi << "], f = ("
            << f_lo << ", " << f_hi << ")";
        throw bracketing_error(msg.str());
    }
    return Bracket{lo, hi, f_lo, f_hi};
}

Bracket expand_bracket(const std::function<double(double)>& f, double lo, double hi,
                       double lo_limit, bool grow_lo, bool grow_hi,
                       int max_expansions) {
    if (!(lo < hi) || !(lo > lo_limit)) {
        throw bracketing_error("expand_bracket: need lo_limit < lo < hi");
    }
    double f_lo = f(lo);
    double f_hi = f(hi);
    for (int i = 0; i < max_expansions; ++i) {
        if (f_lo * f_hi <= 0.0) {
            return Bracket{lo, hi, f_lo, f_hi};
        }
        // Offsets from lo_limit halve downward and double upward, so a hard
        // lower limit (v = 1, T = 0) is approached geometrically, never crossed.
        if (grow_lo) {
            lo = lo_limit + 0.5 * (lo - lo_limit);
            f_lo = f(lo);
            if (f_lo * f_hi <= 0.0) return Bracket{lo, hi, f_lo, f_hi};
        }
        if (grow_hi) {
            hi = lo_limit + 2.0 * (hi - lo_limit);
            f_hi = f(hi);
        }
    }
    std::ostringstream msg;
    msg << "expand_bracket: no sign change found up to [" << lo << ", " << hi << "]";
    throw bracketing_error(msg.str());
}

double find_root(const std::function<double(double)>& f, Bracket bracket,
                 double tol, int max_iter) {
    double a = bracket.lo, b = bracket.hi;
    double fa = bracket.f_lo, fb = bracket.f_hi;
    if (!(a < b)) throw bracketing_error("find_root: invalid bracket ordering");
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw bracketing_error("find_root: endpoints have equal signs");
    if (!(tol > 0.0)) throw std::invalid_argument("find_root: tol must be > 0");

    // Brent: b is the best iterate, a the previous one, c brackets b.
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) {
            return b;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // Inverse quadratic interpolation, secant when only two points differ.
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if (std::abs(d) > tol1) {
            b += d;
        } else {
            b += (xm > 0.0 ? tol1 : -tol1);
        }
        fb = f(b);
    }
    throw convergence_error("find_root: iteration cap reached", {b}, std::abs(fb));
}

std::array<double, 2> newton2(
    const std::function<void(double, double, std::array<double, 2>&,
                             std::array<double, 4>&)>& F,
    std::array<double, 2> guess, double tol, int max_iter) {
    std::array<double, 2> x = guess;
    std::array<double, 2> r{};
    std::array<double, 4> J{};
    F(x[0], x[1], r, J);
    double norm = std::max(std::abs(r[0]), std::abs(r[1]));

    for (int iter = 0; iter < max_iter; ++iter) {
        if (norm < tol) return x;

        const double det = J[0] * J[3] - J[1] * J[2];
        const double scale = std::max({std::abs(J[0]) * std::abs(J[3]),
                                       std::abs(J[1]) * std::abs(J[2]), 1e-300});
        if (std::abs(det) < 1e-14 * scale) {
            throw convergence_error("newton2: singular Jacobian", {x[0], x[1]}, norm);
        }
        const double dx = (J[3] * r[0] - J[1] * r[1]) / det;
        const double dy = (J[0] * r[1] - J[2] * r[0]) / det;

        // Halve the step until the residual norm decreases. Trial points that
        // leave the model's domain count as increases.
        double lambda = 1.0;
        bool accepted = false;
        std::array<double, 2> x_new{};
        std::array<double, 2> r_new{};
        std::array<double, 4> J_new{};
        for (int halving = 0; halving < 60; ++halving) {
            x_new = {x[0] - lambda * dx, x[1] - lambda * dy};
            try {
                F(x_new[0], x_new[1], r_new, J_new);
            } catch (const domain_error&) {
                lambda *= 0.5;
                continue;
            }
            const double norm_new = std::max(std::abs(r_new[0]), std::abs(r_new[1]));
            if (norm_new < norm || norm_new < tol) {
                x = x_new;
                r = r_new;
                J = J_new;
                norm = norm_new;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            throw convergence_error("newton2: damping stalled", {x[0], x[1]}, norm);
        }
    }
    if (norm < tol) return x;
    throw convergence_error("newton2: iteration cap reached", {x[0], x[1]}, norm);
}

namespace {

double simpson(double fa, double fm, double fb, double h) {
    return (fa + 4.0 * fm + fb) * (h / 6.0);
}

double adapt(const std::function<double(double)>& f, double a, double m, double b,
             double fa, double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double err = (left + right - whole) / 15.0;
    if (std::abs(err) <= tol) {
        return left + right + err;
    }
    if (depth >= 50) {
        throw quadrature_error("integrate: recursion depth cap reached (singular integrand?)");
    }
    return adapt(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           adapt(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, tol);
    if (!(tol > 0.0)) throw std::invalid_argument("integrate: tol must be > 0");
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(fa, fm, fb, b - a);
    return adapt(f, a, m, b, fa, fm, fb, whole, tol, 0);
}

MonotoneTable::MonotoneTable(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2) {
        throw std::invalid_argument("MonotoneTable: need >= 2 knots with matching sizes");
    }
    const std::size_t n = x_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(x_[i] < x_[i + 1])) {
            throw std::invalid_argument("MonotoneTable: x must be strictly increasing");
        }
    }
    increasing_ = y_[1] > y_[0];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const bool up = y_[i + 1] > y_[i];
        if (up != increasing_ || y_[i + 1] == y_[i]) {
            throw std::invalid_argument("MonotoneTable: y must be strictly monotone");
        }
    }

    // Fritsch-Carlson slopes: start from secant averages, then rescale so the
    // Hermite patches cannot overshoot (alpha^2 + beta^2 <= 9).
    std::vector<double> secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        secant[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    }
    slope_.assign(n, 0.0);
    slope_[0] = secant[0];
    slope_[n - 1] = secant[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        slope_[i] = 0.5 * (secant[i - 1] + secant[i]);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double alpha = slope_[i] / secant[i];
        const double beta = slope_[i + 1] / secant[i];
        const double s = alpha * alpha + beta * beta;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            slope_[i] = tau * alpha * secant[i];
            slope_[i + 1] = tau * beta * secant[i];
        }
    }
}

double MonotoneTable::operator()(double x) const {
    if (x < x_.front() || x > x_.back()) {
        throw range_error("MonotoneTable: x outside knot span",
                          x < x_.front() ? range_error::side::below
                                         : range_error::side::above);
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t pos = static_cast<std::size_t>(std::distance(x_.begin(), it));
    const std::size_t i = std::min(pos == 0 ? 0 : pos - 1, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

std::size_t MonotoneTable::segment_of_y(double y) const {
    const double ylo = y_min();
    const double yhi = y_max();
    if (y < ylo) {
        throw range_error("MonotoneTable: y below table range", range_error::side::below);
    }
    if (y > yhi) {
        throw range_error("MonotoneTable: y above table range", range_error::side::above);
    }
    // Binary search over knot values in the table's own direction.
    std::size_t lo = 0, hi = y_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        const bool go_right = increasing_ ? (y_[mid] <= y) : (y_[mid] >= y);
        if (go_right) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

double MonotoneTable::inverse(double y) const {
    const std::size_t i = segment_of_y(y);
    if (y == y_[i]) return x_[i];
    if (y == y_[i + 1]) return x_[i + 1];
    const auto g = [&](double x) { return (*this)(x) - y; };
    // The patch is monotone, so the segment brackets the solution.
    return find_root(g, Bracket{x_[i], x_[i + 1], g(x_[i]), g(x_[i + 1])},
                     1e-14 * std::max(1.0, std::abs(x_[i + 1])));
}

double MonotoneTable::inverse(double y, const std::function<double(double)>& f,
                              double tol) const {
    const std::size_t i = segment_of_y(y);
    const auto g = [&](double x) { return f(x) - y; };
    double lo = x_[i], hi = x_[i + 1];
    double g_lo = g(lo), g_hi = g(hi);
    // f may disagree with the table by interpolation error near the knots, so
    // widen to the neighbouring segments before giving up.
    if (g_lo * g_hi > 0.0) {
        if (i > 0) {
            lo = x_[i - 1];
            g_lo = g(lo);
        }
        if (g_lo * g_hi > 0.0 && i + 2 < x_.size()) {
            hi = x_[i + 2];
            g_hi = g(hi);
        }
    }
    if (g_lo * g_hi > 0.0) {
        throw bracketing_error("MonotoneTable::inverse: attached function does not "
                               "bracket the target near the table segment");
    }
    return find_root(g, Bracket{lo, hi, g_lo, g_hi}, tol);
}

}  // namespace rkflow::numerics
