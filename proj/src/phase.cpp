#include "rkflow/phase.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rkflow::phase {

using eos::GasModel;
using eos::PotentialDerivs;
using numerics::Bracket;
using numerics::expand_bracket;
using numerics::find_root;
using numerics::integrate;

const char* to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::Liquid: return "liquid";
        case PhaseLabel::Gas: return "gas";
        case PhaseLabel::Condensation: return "condensation";
        case PhaseLabel::Supercritical: return "supercritical";
        case PhaseLabel::Inapplicable: return "inapplicable";
    }
    return "?";
}

SpinodalRoots spinodal_roots(double T, const GasModel& gas) {
    const auto& crit = gas.critical();
    if (!(T > 0.0) || !(T < crit.T_c)) {
        throw domain_error("spinodal_roots: need 0 < T < T_c");
    }
    const auto f = [&](double v) { return gas.potential(v, T).phi_vv; };
    // phi_vv < 0 at v -> 1+, > 0 at v_c for T < T_c, < 0 again at large v.
    const auto left = expand_bracket(f, 1.0 + 0.5 * (crit.v_c - 1.0), crit.v_c, 1.0,
                                     true, false);
    const double v_left = find_root(f, left, 1e-13);
    const auto right = expand_bracket(f, crit.v_c, 2.0 * crit.v_c, 1.0, false, true);
    const double v_right = find_root(f, right, 1e-13);
    return SpinodalRoots{v_left, v_right};
}

namespace {

// Volume on the decreasing branch left of v_lim (liquid side) where p equals
// p_target; the branch runs from +inf down to p(v_lim).
double liquid_volume_at_pressure(double p_target, double T, double v_lim,
                                 const GasModel& gas) {
    const auto f = [&](double v) { return gas.state(v, T).p - p_target; };
    const auto br = expand_bracket(f, 1.0 + 0.5 * (v_lim - 1.0), v_lim, 1.0, true, false);
    return find_root(f, br, 1e-13 * std::max(1.0, v_lim));
}

// Volume on the outer decreasing branch right of v_lim where p = p_target.
double gas_volume_at_pressure(double p_target, double T, double v_lim,
                              const GasModel& gas) {
    const auto f = [&](double v) { return gas.state(v, T).p - p_target; };
    const auto br = expand_bracket(f, v_lim, 2.0 * v_lim, 1.0, false, true);
    return find_root(f, br, 1e-12 * std::max(1.0, 2.0 * v_lim));
}

struct PairSeed {
    double v1;
    double v2;
};

// Midpoint-pressure seeding: project the admissible pressure window's centre
// onto both outer branches. Lands outside the true pair on both sides.
PairSeed seed_from_spinodal(double T, const SpinodalRoots& sp, const GasModel& gas) {
    const double p_left = gas.state(sp.v_left, T).p;
    const double p_right = gas.state(sp.v_right, T).p;
    const double p_seed = 0.5 * (std::max(p_left, 0.0) + p_right);
    return PairSeed{liquid_volume_at_pressure(p_seed, T, sp.v_left, gas),
                    gas_volume_at_pressure(p_seed, T, sp.v_right, gas)};
}

CoexistencePoint newton_pair(double T, PairSeed seed, const SpinodalRoots& sp,
                             const GasModel& gas, double tol) {
    const auto F = [&](double v1, double v2, std::array<double, 2>& r,
                       std::array<double, 4>& J) {
        // Keep iterates on the outer branches; the solution is strictly there.
        if (!(v1 > 1.0) || !(v1 <= sp.v_left) || !(v2 >= sp.v_right)) {
            throw domain_error("pair iterate left the outer branches");
        }
        const PotentialDerivs d1 = gas.potential(v1, T);
        const PotentialDerivs d2 = gas.potential(v2, T);
        r = {d2.phi_v - d1.phi_v,
             (d2.phi - v2 * d2.phi_v) - (d1.phi - v1 * d1.phi_v)};
        J = {-d1.phi_vv, d2.phi_vv, v1 * d1.phi_vv, -v2 * d2.phi_vv};
    };
    const auto sol = numerics::newton2(F, {seed.v1, seed.v2}, tol);
    CoexistencePoint pt{};
    pt.T = T;
    pt.v_liquid = sol[0];
    pt.v_gas = sol[1];
    pt.p_sat = T * gas.potential(pt.v_gas, T).phi_v;
    return pt;
}

}  // namespace

CoexistencePoint solve_pair(double T, const GasModel& gas) {
    const auto& crit = gas.critical();
    if (!(T > 0.0)) throw domain_error("solve_pair: T must be > 0");
    if (T >= crit.T_c) {
        std::ostringstream msg;
        msg << "solve_pair: no coexistence at T = " << T << " >= T_c = " << crit.T_c;
        throw domain_error(msg.str());
    }
    const SpinodalRoots sp = spinodal_roots(T, gas);
    return newton_pair(T, seed_from_spinodal(T, sp, gas), sp, gas, 1e-12);
}

EqualAreaResult equal_area_pressure(double T, const GasModel& gas) {
    const auto& crit = gas.critical();
    if (!(T > 0.0)) throw domain_error("equal_area_pressure: T must be > 0");
    if (T >= crit.T_c) {
        throw domain_error("equal_area_pressure: no coexistence at or above T_c");
    }
    const SpinodalRoots sp = spinodal_roots(T, gas);
    const double p_min_local = gas.state(sp.v_left, T).p;   // isotherm local min
    const double p_max_local = gas.state(sp.v_right, T).p;  // isotherm local max
    const double p_lo = std::max(p_min_local, 1e-4 * p_max_local);
    const double p_hi = p_max_local * (1.0 - 1e-12);

    // Signed Maxwell area between the outer roots; strictly decreasing in p,
    // so a single bracketed root gives the saturation pressure.
    const auto area = [&](double p) {
        const double v1 = liquid_volume_at_pressure(p, T, sp.v_left, gas);
        const double v2 = gas_volume_at_pressure(p, T, sp.v_right, gas);
        const auto f = [&](double v) { return gas.state(v, T).p - p; };
        return integrate(f, v1, v2, 1e-12 * (v2 - v1) * std::max(1.0, p_max_local));
    };
    const double p_sat = find_root(area, Bracket::from(area, p_lo, p_hi),
                                   1e-12 * std::max(1.0, p_max_local));
    EqualAreaResult res{};
    res.p_sat = p_sat;
    res.v_liquid = liquid_volume_at_pressure(p_sat, T, sp.v_left, gas);
    res.v_gas = gas_volume_at_pressure(p_sat, T, sp.v_right, gas);
    return res;
}

CoexistenceCurve::CoexistenceCurve(std::vector<CoexistencePoint> points,
                                   eos::CriticalPoint crit)
    : points_(std::move(points)),
      crit_(crit),
      v_liquid_tab_([&] {
          std::vector<double> t, y;
          for (const auto& p : points_) {
              t.push_back(p.T);
              y.push_back(p.v_liquid);
          }
          return numerics::MonotoneTable(std::move(t), std::move(y));
      }()),
      v_gas_tab_([&] {
          std::vector<double> t, y;
          for (const auto& p : points_) {
              t.push_back(p.T);
              y.push_back(p.v_gas);
          }
          return numerics::MonotoneTable(std::move(t), std::move(y));
      }()),
      p_sat_tab_([&] {
          std::vector<double> t, y;
          for (const auto& p : points_) {
              t.push_back(p.T);
              y.push_back(p.p_sat);
          }
          return numerics::MonotoneTable(std::move(t), std::move(y));
      }()) {}

double CoexistenceCurve::v_liquid_at(double T) const { return v_liquid_tab_(T); }
double CoexistenceCurve::v_gas_at(double T) const { return v_gas_tab_(T); }
double CoexistenceCurve::p_sat_at(double T) const { return p_sat_tab_(T); }

namespace {

// Quadratic-expansion seed near T_c: the binodal half-width is sqrt(3) times
// the spinodal half-width to leading order in T_c - T.
PairSeed near_critical_seed(double T, const GasModel& gas) {
    const auto& crit = gas.critical();
    const SpinodalRoots sp = spinodal_roots(T, gas);
    const double d_left = crit.v_c - sp.v_left;
    const double d_right = sp.v_right - crit.v_c;
    const double rt3 = std::sqrt(3.0);
    return PairSeed{std::max(1.0 + 1e-12, crit.v_c - rt3 * d_left),
                    crit.v_c + rt3 * d_right};
}

CoexistencePoint solve_with_seed(double T, PairSeed seed, const GasModel& gas) {
    const SpinodalRoots sp = spinodal_roots(T, gas);
    seed.v1 = std::min(seed.v1, sp.v_left * (1.0 - 1e-12) + 1e-12);
    seed.v1 = std::max(seed.v1, 1.0 + 1e-12);
    seed.v2 = std::max(seed.v2, sp.v_right * (1.0 + 1e-12));
    return newton_pair(T, seed, sp, gas, 1e-12);
}

}  // namespace

CoexistenceCurve trace_curve(double T_min, double T_max, int steps,
                             const GasModel& gas) {
    const auto& crit = gas.critical();
    if (!(T_min > 0.0) || !(T_min < T_max) || !(T_max <= crit.T_c)) {
        throw domain_error("trace_curve: need 0 < T_min < T_max <= T_c");
    }
    if (steps < 2) throw domain_error("trace_curve: need steps >= 2");

    std::vector<double> grid(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        grid[i] = T_min + (T_max - T_min) * i / steps;
    }
    grid.front() = T_min;
    grid.back() = T_max;  // rounding must not push the endpoint past T_c

    // March from the top of the grid downward; near-critical points are seeded
    // by the quadratic expansion, the rest by continuation from the previous
    // pair (log-linear extrapolation of the branch offsets).
    const double T_start = 0.995 * crit.T_c;
    std::vector<CoexistencePoint> descending;
    CoexistencePoint prev{};
    CoexistencePoint prev2{};
    int have = 0;

    for (int i = steps; i >= 0; --i) {
        const double T = grid[i];
        if (T >= crit.T_c * (1.0 - 1e-12)) {
            // Collapse point; both equations hold identically at v1 = v2.
            descending.push_back(
                CoexistencePoint{T, eos::state(crit.v_c, T, gas.n()).p, crit.v_c,
                                 crit.v_c});
            continue;
        }
        CoexistencePoint pt{};
        if (T > T_start || have == 0) {
            try {
                pt = solve_with_seed(T, near_critical_seed(T, gas), gas);
            } catch (const convergence_error&) {
                pt = solve_pair(T, gas);
            }
        } else {
            PairSeed seed{prev.v_liquid, prev.v_gas};
            if (have >= 2 && prev2.T > prev.T) {
                const double w = (prev.T - T) / (prev2.T - prev.T);
                seed.v1 = 1.0 + std::exp(std::log(prev.v_liquid - 1.0) -
                                         w * (std::log(prev2.v_liquid - 1.0) -
                                              std::log(prev.v_liquid - 1.0)));
                seed.v2 = 1.0 + std::exp(std::log(prev.v_gas - 1.0) -
                                         w * (std::log(prev2.v_gas - 1.0) -
                                              std::log(prev.v_gas - 1.0)));
            }
            try {
                pt = solve_with_seed(T, seed, gas);
            } catch (const convergence_error&) {
                // Halve the continuation step until the Newton solve recovers.
                double T_known = prev.T;
                CoexistencePoint walk = prev;
                bool ok = false;
                for (int depth = 0; depth < 24 && !ok; ++depth) {
                    const double T_mid = 0.5 * (T_known + T);
                    try {
                        walk = solve_with_seed(T_mid, {walk.v_liquid, walk.v_gas}, gas);
                        T_known = T_mid;
                        pt = solve_with_seed(T, {walk.v_liquid, walk.v_gas}, gas);
                        ok = true;
                    } catch (const convergence_error&) {
                    }
                }
                if (!ok) {
                    std::ostringstream msg;
                    msg << "trace_curve: continuation failed at T = " << T;
                    throw convergence_error(msg.str(), {walk.v_liquid, walk.v_gas}, 0.0);
                }
            }
        }
        prev2 = prev;
        prev = pt;
        ++have;
        descending.push_back(pt);
    }

    std::reverse(descending.begin(), descending.end());
    return CoexistenceCurve(std::move(descending), crit);
}

PhaseLabel classify(double v, double T, const CoexistenceCurve& curve,
                    const GasModel& gas) {
    eos::check_domain(v, T);
    if (T >= curve.critical().T_c) return PhaseLabel::Supercritical;
    if (T < curve.T_min()) {
        throw range_error("classify: T below the traced curve range",
                          range_error::side::below);
    }
    if (!gas.is_applicable(v, T)) return PhaseLabel::Inapplicable;
    const double v_l = curve.v_liquid_at(T);
    const double v_g = curve.v_gas_at(T);
    if (v <= v_l) return PhaseLabel::Liquid;
    if (v >= v_g) return PhaseLabel::Gas;
    return PhaseLabel::Condensation;
}

}  // namespace rkflow::phase
