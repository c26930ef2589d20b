#include "rkflow/eos.hpp"

#include <cmath>
#include <sstream>

#include "rkflow/numerics.hpp"

namespace rkflow::eos {

void GasParams::validate() const {
    if (!(n >= 1.0)) throw domain_error("GasParams: n must be >= 1");
    if (!(a > 0.0)) throw domain_error("GasParams: a must be > 0");
    if (!(b > 0.0)) throw domain_error("GasParams: b must be > 0");
    if (!(R > 0.0)) throw domain_error("GasParams: R must be > 0");
}

void check_domain(double v, double T) {
    if (!(v > 1.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "state domain: v must be > 1 (got " << v << ")";
        throw domain_error(msg.str());
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        std::ostringstream msg;
        msg << "state domain: T must be > 0 (got " << T << ")";
        throw domain_error(msg.str());
    }
}

PotentialDerivs potential(double v, double T, double n) {
    check_domain(v, T);
    const double lnT = std::log(T);
    const double lnv1 = std::log(v - 1.0);
    const double L = -std::log1p(1.0 / v);  // ln(v/(v+1)) < 0, no cancellation
    const double t32 = std::pow(T, -1.5);
    const double t52 = t32 / T;
    const double t72 = t52 / T;

    const double vv1 = v * (v + 1.0);
    const double num2 = 2.0 * v + 1.0;            // d/dv of -1/(v(v+1)) numerator
    const double num3 = 3.0 * v * v + 3.0 * v + 1.0;

    PotentialDerivs d{};
    d.phi = 0.5 * n * lnT + lnv1 - t32 * L;
    d.phi_v = 1.0 / (v - 1.0) - t32 / vv1;
    d.phi_T = 0.5 * n / T + 1.5 * t52 * L;
    d.phi_vv = -1.0 / ((v - 1.0) * (v - 1.0)) + t32 * num2 / (vv1 * vv1);
    d.phi_TT = -0.5 * n / (T * T) - 3.75 * t72 * L;
    d.phi_vT = 1.5 * t52 / vv1;
    d.phi_vvv = 2.0 / std::pow(v - 1.0, 3) - 2.0 * t32 * num3 / std::pow(vv1, 3);
    return d;
}

StatePoint state(double v, double T, double n) {
    const PotentialDerivs d = potential(v, T, n);
    const double L = -std::log1p(1.0 / v);
    StatePoint s{};
    s.v = v;
    s.T = T;
    s.p = T * d.phi_v;
    s.e = T * T * d.phi_T;
    // Reduced-entropy convention: (entrRed) = phi + T phi_T - n/2.
    s.sigma = 0.5 * n * std::log(T) + std::log(v - 1.0) + 0.5 * std::pow(T, -1.5) * L;
    s.gamma = T * (v * d.phi_v - d.phi);
    return s;
}

KappaForm kappa(double v, double T, double n) {
    check_domain(v, T);
    const double t32 = std::pow(T, 1.5);
    const double vv1 = v * (v + 1.0);
    KappaForm k{};
    k.k_TT = -(0.5 * n / (T * T) +
               0.75 * std::pow(T, -3.5) * std::log1p(1.0 / v));
    // Numerator factors as v^2 (v+1)^2 T^{3/2} - (v-1)^2 (2v+1).
    k.k_vv = -(vv1 * vv1 * t32 - (2.0 * v * v * v - 3.0 * v * v + 1.0)) /
             (t32 * (v + 1.0) * (v + 1.0) * v * v * (v - 1.0) * (v - 1.0));
    return k;
}

bool is_applicable(double v, double T, double n) {
    const PotentialDerivs d = potential(v, T, n);
    return d.phi_vv < 0.0 && (d.phi_TT + 2.0 * d.phi_T / T) > 0.0;
}

double spinodal_temperature(double v) {
    if (!(v > 1.0)) throw domain_error("spinodal_temperature: v must be > 1");
    const double num = (v - 1.0) * (v - 1.0) * (2.0 * v + 1.0);
    const double den = v * v * (v + 1.0) * (v + 1.0);
    return std::pow(num / den, 2.0 / 3.0);
}

namespace {

// Higher v-partials used only by the critical-point Newton solve.
double phi_vvT(double v, double T) {
    const double vv1 = v * (v + 1.0);
    return -1.5 * std::pow(T, -2.5) * (2.0 * v + 1.0) / (vv1 * vv1);
}

double phi_vvvT(double v, double T) {
    const double vv1 = v * (v + 1.0);
    return 3.0 * std::pow(T, -2.5) * (3.0 * v * v + 3.0 * v + 1.0) / std::pow(vv1, 3);
}

double phi_vvvv(double v, double T) {
    const double vv1 = v * (v + 1.0);
    return -6.0 / std::pow(v - 1.0, 4) +
           6.0 * std::pow(T, -1.5) * (2.0 * v + 1.0) * (2.0 * v * v + 2.0 * v + 1.0) /
               std::pow(vv1, 4);
}

}  // namespace

CriticalPoint solve_critical_point() {
    const auto F = [](double v, double T, std::array<double, 2>& r,
                      std::array<double, 4>& J) {
        const PotentialDerivs d = potential(v, T);
        r = {d.phi_vv, d.phi_vvv};
        J = {d.phi_vvv, phi_vvT(v, T), phi_vvvv(v, T), phi_vvvT(v, T)};
    };
    const auto sol = numerics::newton2(F, {4.0, 0.3}, 1e-13);
    CriticalPoint c{};
    c.v_c = sol[0];
    c.T_c = sol[1];
    c.p_c = state(c.v_c, c.T_c).p;
    return c;
}

ScaleFactors scale_factors(const GasParams& params) {
    params.validate();
    const double a = params.a, b = params.b, R = params.R;
    ScaleFactors s{};
    s.p = std::cbrt(R * a * a / std::pow(b, 5));
    s.T = std::pow(a / (R * b), 2.0 / 3.0);
    s.v = b;
    s.e = std::cbrt(R * a * a / (b * b));
    s.sigma = R;
    return s;
}

StateTuple to_reduced(const StateTuple& physical, const GasParams& params) {
    const ScaleFactors s = scale_factors(params);
    return StateTuple{physical.p / s.p, physical.T / s.T, physical.v / s.v,
                      physical.e / s.e, physical.sigma / s.sigma};
}

StateTuple from_reduced(const StateTuple& reduced, const GasParams& params) {
    const ScaleFactors s = scale_factors(params);
    return StateTuple{reduced.p * s.p, reduced.T * s.T, reduced.v * s.v,
                      reduced.e * s.e, reduced.sigma * s.sigma};
}

GasModel::GasModel(GasParams params) : params_(params) {
    params_.validate();
    critical_ = solve_critical_point();
}

}  // namespace rkflow::eos
