#pragma once

#include <array>
#include <functional>
#include <vector>

#include "rkflow/errors.hpp"

namespace rkflow::numerics {

/// Default absolute tolerance used when a caller does not override.
inline constexpr double kDefaultTol = 1e-10;

/// Sign-change interval for scalar root finding.
struct Bracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;

    /// Evaluates f at both ends. Throws bracketing_error if f_lo*f_hi > 0.
    static Bracket from(const std::function<double(double)>& f, double lo, double hi);
};

/// Brent root finder: inverse quadratic / secant with a bisection safeguard.
/// Returns x with the final bracket width <= tol; convergence is guaranteed
/// for continuous f on a valid bracket.
double find_root(const std::function<double(double)>& f, Bracket bracket,
                 double tol = kDefaultTol, int max_iter = 200);

/// Grows [lo, hi] geometrically around the seed interval until f changes sign.
/// grow_lo/grow_hi select which ends may move (lo is never taken below lo_limit).
Bracket expand_bracket(const std::function<double(double)>& f, double lo, double hi,
                       double lo_limit, bool grow_lo = true, bool grow_hi = true,
                       int max_expansions = 200);

/// Damped Newton for a 2x2 system with analytic Jacobian.
/// F fills residual r[2] and row-major Jacobian J[4] at (x, y).
/// The step is halved until the residual norm decreases (up to 60 halvings).
std::array<double, 2> newton2(
    const std::function<void(double, double, std::array<double, 2>&,
                             std::array<double, 4>&)>& F,
    std::array<double, 2> guess, double tol = kDefaultTol, int max_iter = 100);

/// Adaptive Simpson quadrature with error estimate < tol (absolute).
/// Supports a > b (sign flip). Recursion depth is capped at 50; hitting the
/// cap raises quadrature_error.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = kDefaultTol);

/// Strictly monotone table with Fritsch-Carlson monotone cubic interpolation.
/// Monotonicity of y is validated on construction, so the interpolant is
/// invertible between any two knots.
class MonotoneTable {
public:
    MonotoneTable(std::vector<double> x, std::vector<double> y);

    bool increasing() const { return increasing_; }
    std::size_t size() const { return x_.size(); }
    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    double y_min() const { return increasing_ ? y_.front() : y_.back(); }
    double y_max() const { return increasing_ ? y_.back() : y_.front(); }

    /// Interpolated forward evaluation; x clamped to the knot span is an error.
    double operator()(double x) const;

    /// Inverse lookup: returns x with table(x) = y, exact on knots.
    /// y outside [y_min, y_max] raises range_error naming the violated end.
    double inverse(double y) const;

    /// Inverse refined by find_root on an attached exact function f (the table
    /// is used only to locate the bracketing interval and seed the solve).
    double inverse(double y, const std::function<double(double)>& f,
                   double tol = kDefaultTol) const;

private:
    std::size_t segment_of_y(double y) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> slope_;  // Fritsch-Carlson knot slopes
    bool increasing_;
};

}  // namespace rkflow::numerics
