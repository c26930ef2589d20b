#pragma once

#include <optional>
#include <vector>

#include "rkflow/eos.hpp"
#include "rkflow/numerics.hpp"

namespace rkflow::isentrope {

/// Medium constants of the Darcy law (held constant per run).
struct MediumParams {
    double k = 1.0;   // permeability
    double mu = 1.0;  // dynamic viscosity

    void validate() const;
};

/// Large-v and near-covolume asymptotic coefficients at entropy level sigma0:
///   B_star solves -sigma0 = B/2 + ln B,   c = B_star^{-2/3} - B_star^{1/3},
///   B = e^{sigma0}.
/// c changes sign exactly at sigma0 = -1/2 (B_star = 1), the invertibility
/// threshold of Q.
struct AsymptoticCoeffs {
    double B_star;
    double c;
    double B;
};

AsymptoticCoeffs asymptotic_coeffs(double sigma0);

/// Unique root T of sigma(v, T) = sigma0; the left side is strictly increasing
/// in T, so a bracket built from the two asymptotic guesses always closes in.
/// seed, when given, narrows the initial bracket (continuation fast path).
double temperature(double v, double sigma0, double n = 3.0,
                   std::optional<double> seed = std::nullopt);

double pressure_on_isentrope(double v, double sigma0, double n = 3.0);

/// Total derivative dp/dv along the isentrope, using the analytic
/// dT/dv = -sigma_v / sigma_T at fixed sigma0.
double dp_dv(double v, double sigma0, double n = 3.0);

/// Everything below is n = 3 machinery: the asymptotic tail that anchors Q's
/// normalization Q(inf) = 0 exists in closed form only for n = 3.

/// Filtration potential Q(v, sigma0) = -(k/mu) * int_inf^v p'(s)/s ds,
/// normalized so Q -> 0 as v -> inf. Closed asymptotic tail above v_switch,
/// panelled adaptive quadrature below.
double q_potential(double v, double sigma0, const MediumParams& medium = {});

inline constexpr double kTailSwitch = 1e4;

/// Entropy level at which dp/dv = 0 first happens at volume v: solves the
/// G(T, v) = 0 condition numerically in T and evaluates sigma there.
double h_function(double v);

/// Limit of H(v) as v -> inf (Aitken extrapolation over v = 1e3, 1e4, 1e5).
/// This is the invertibility threshold of Q; approximately -0.5.
double sigma_star();

/// Checks dp/dv < 0 on a dense log-spaced v sample; Q is monotone iff so.
bool q_monotone(double sigma0, int samples = 2000, double v_offset_min = 1e-6,
                double v_offset_max = 1e6);

/// Tabulated isentrope: monotone maps v -> T, p, Q on log-spaced knots plus
/// invertibility metadata. Immutable after build; safe to share across threads.
class Isentrope {
public:
    static Isentrope build(double sigma0, MediumParams medium = {},
                           double v_max = 1e6, int knots = 400);

    double sigma0() const { return sigma0_; }
    const MediumParams& medium() const { return medium_; }
    bool invertible() const { return invertible_; }
    /// (inf Q, sup Q) over all v > 1; (-inf, 0) on invertible isentropes.
    double q_inf() const { return q_inf_; }
    double q_sup() const { return q_sup_; }

    const std::vector<double>& v_knots() const { return v_; }
    const std::vector<double>& t_knots() const { return t_; }
    const std::vector<double>& p_knots() const { return p_; }
    const std::vector<double>& q_knots() const { return q_; }

    /// Pointwise evaluation, table-seeded but solved to full precision.
    double temperature(double v) const;
    double pressure(double v) const;
    double dp_dv(double v) const;
    /// Q anchored at the nearest knot above v (closed tail beyond v_switch).
    double q(double v) const;

private:
    Isentrope() = default;

    // (k/mu) int p'(s)/s ds between covolume offsets (off = v - 1); internals
    // run on offsets to avoid cancellation near v = 1.
    double segment_off(double off_a, double off_b, double q_scale) const;
    double tail(double v) const;
    double seed_from_table(double off) const;

    double sigma0_ = 0.0;
    MediumParams medium_{};
    AsymptoticCoeffs coeffs_{};
    double tail_d_ = 0.0;  // second tail coefficient
    double tail_g_ = 0.0;  // third tail coefficient
    bool invertible_ = false;
    double q_inf_ = 0.0;
    double q_sup_ = 0.0;
    std::vector<double> off_, v_, t_, p_, q_;

    friend double invert_q(const Isentrope& iso, double q);
};

/// Inverse of Q on an invertible isentrope, refined by find_root against the
/// exact Q. On non-invertible isentropes throws multivalued_error listing all
/// branch volumes; q outside the range throws range_error.
double invert_q(const Isentrope& iso, double q);

}  // namespace rkflow::isentrope
