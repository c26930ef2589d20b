#pragma once

#include "rkflow/errors.hpp"

namespace rkflow::eos {

/// Gas constants in physical units plus the degrees of freedom n.
/// Internally everything runs in reduced units; a, b, R only enter through
/// the scale transformation at the to_reduced/from_reduced boundary.
struct GasParams {
    double n = 3.0;
    double a = 1.0;
    double b = 1.0;
    double R = 1.0;

    void validate() const;
};

/// phi(v,T) = (n/2) ln T + ln(v-1) - T^{-3/2} ln(v/(v+1)) and its partials,
/// all closed-form.
struct PotentialDerivs {
    double phi;
    double phi_v;
    double phi_T;
    double phi_vv;
    double phi_TT;
    double phi_vT;
    double phi_vvv;
};

/// One point of the state surface in reduced units.
struct StatePoint {
    double v;
    double T;
    double p;
    double e;
    double sigma;
    double gamma;
};

/// Coefficients of the quadratic form kappa = k_TT dT*dT + k_vv dv*dv
/// (diagonal for this gas). k_TT < 0 everywhere on v > 1; the spinodal is
/// exactly k_vv = 0.
struct KappaForm {
    double k_TT;
    double k_vv;
};

struct CriticalPoint {
    double v_c;
    double T_c;
    double p_c;
};

/// (p,T,v,e,sigma) tuple used on both sides of the unit-scaling boundary.
struct StateTuple {
    double p;
    double T;
    double v;
    double e;
    double sigma;
};

/// Multiplicative factors physical = scale * reduced for each coordinate.
struct ScaleFactors {
    double p;
    double T;
    double v;
    double e;  // also applies to the Gibbs potential
    double sigma;
};

void check_domain(double v, double T);

/// Closed-form potential and partials. Throws domain_error for v <= 1 or T <= 0.
PotentialDerivs potential(double v, double T, double n = 3.0);

/// Full reduced state: p = T phi_v, e = T^2 phi_T, gamma = T (v phi_v - phi).
/// sigma uses the reduced-entropy convention (n/2 below phi + T phi_T).
StatePoint state(double v, double T, double n = 3.0);

KappaForm kappa(double v, double T, double n = 3.0);

/// Strict test of phi_vv < 0 and phi_TT + 2 phi_T / T > 0; boundary excluded.
bool is_applicable(double v, double T, double n = 3.0);

/// Spinodal temperature T_sp(v) = ((v-1)^2 (2v+1) / (v^2 (v+1)^2))^(2/3),
/// the unique positive root of k_vv's numerator. Independent of n.
double spinodal_temperature(double v);

/// Solves phi_vv = phi_vvv = 0 with a damped 2x2 Newton from (v,T) = (4, 0.3).
CriticalPoint solve_critical_point();

ScaleFactors scale_factors(const GasParams& params);
StateTuple to_reduced(const StateTuple& physical, const GasParams& params);
StateTuple from_reduced(const StateTuple& reduced, const GasParams& params);

/// Immutable gas model: parameters plus the cached critical point.
class GasModel {
public:
    explicit GasModel(GasParams params = GasParams{});

    const GasParams& params() const { return params_; }
    double n() const { return params_.n; }
    const CriticalPoint& critical() const { return critical_; }

    PotentialDerivs potential(double v, double T) const { return eos::potential(v, T, params_.n); }
    StatePoint state(double v, double T) const { return eos::state(v, T, params_.n); }
    KappaForm kappa(double v, double T) const { return eos::kappa(v, T, params_.n); }
    bool is_applicable(double v, double T) const { return eos::is_applicable(v, T, params_.n); }

private:
    GasParams params_;
    CriticalPoint critical_;
};

}  // namespace rkflow::eos
