#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rkflow {

/// Input outside the physical domain (v <= 1, T <= 0, bad parameters).
class domain_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Root bracketing failed: no sign change on the given interval.
class bracketing_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver did not converge; carries the last iterate for diagnostics.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, std::vector<double> last_iterate,
                      double residual)
        : std::runtime_error(what),
          last_iterate(std::move(last_iterate)),
          residual(residual) {}

    std::vector<double> last_iterate;
    double residual = 0.0;
};

/// Adaptive quadrature hit its recursion cap before reaching the tolerance.
class quadrature_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Query value outside a table or function range; side tells which end.
class range_error : public std::out_of_range {
public:
    enum class side { below, above };

    range_error(const std::string& what, side which)
        : std::out_of_range(what), which(which) {}

    side which;
};

/// Inversion of a non-monotone function: all branch solutions are reported.
class multivalued_error : public std::runtime_error {
public:
    multivalued_error(const std::string& what, std::vector<double> branches)
        : std::runtime_error(what), branches(std::move(branches)) {}

    std::vector<double> branches;
};

/// Scenario/configuration rejected before any numerics ran.
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace rkflow
