#pragma once

#include <optional>
#include <vector>

#include "rkflow/eos.hpp"
#include "rkflow/numerics.hpp"

namespace rkflow::phase {

enum class PhaseLabel { Liquid, Gas, Condensation, Supercritical, Inapplicable };

const char* to_string(PhaseLabel label);

/// One phase-equivalent pair: equal T, pressure and Gibbs potential.
struct CoexistencePoint {
    double T;
    double p_sat;
    double v_liquid;
    double v_gas;
};

/// Equal-area construction result (the independent oracle route).
struct EqualAreaResult {
    double p_sat;
    double v_liquid;
    double v_gas;
};

/// Volumes of the two spinodal branches at T < T_c (left < v_c < right).
struct SpinodalRoots {
    double v_left;
    double v_right;
};

SpinodalRoots spinodal_roots(double T, const eos::GasModel& gas);

/// Solves the phase-equivalence system
///   phi_v(v2,T) = phi_v(v1,T),
///   phi(v2,T) - v2 phi_v(v2,T) = phi(v1,T) - v1 phi_v(v1,T)
/// with a damped Newton seeded from the spinodal branches. Residuals < 1e-10.
CoexistencePoint solve_pair(double T, const eos::GasModel& gas);

/// Same coexistence state via the Maxwell equal-area rule: bisection over p
/// between the spinodal pressures, areas by adaptive quadrature. Kept free of
/// the Newton route so the two can cross-check each other.
EqualAreaResult equal_area_pressure(double T, const eos::GasModel& gas);

/// Binodal traced by continuation: start near T_c (quadratic-expansion seeds),
/// march down, each isotherm seeding the next. Points come out ascending in T.
class CoexistenceCurve {
public:
    CoexistenceCurve(std::vector<CoexistencePoint> points, eos::CriticalPoint crit);

    const std::vector<CoexistencePoint>& points() const { return points_; }
    double T_min() const { return points_.front().T; }
    double T_max() const { return points_.back().T; }
    const eos::CriticalPoint& critical() const { return crit_; }

    /// Monotone-cubic interpolation of the branch volumes and p_sat in T.
    double v_liquid_at(double T) const;
    double v_gas_at(double T) const;
    double p_sat_at(double T) const;

private:
    std::vector<CoexistencePoint> points_;
    eos::CriticalPoint crit_;
    numerics::MonotoneTable v_liquid_tab_;
    numerics::MonotoneTable v_gas_tab_;
    numerics::MonotoneTable p_sat_tab_;
};

CoexistenceCurve trace_curve(double T_min, double T_max, int steps,
                             const eos::GasModel& gas);

/// Phase label of a state point against a traced curve. Ties on a branch get
/// the single-phase label; Condensation is the open region between branches.
PhaseLabel classify(double v, double T, const CoexistenceCurve& curve,
                    const eos::GasModel& gas);

}  // namespace rkflow::phase
