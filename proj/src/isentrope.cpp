#include "rkflow/isentrope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rkflow::isentrope {

using numerics::Bracket;
using numerics::expand_bracket;
using numerics::find_root;
using numerics::integrate;

void MediumParams::validate() const {
    if (!(k > 0.0)) throw domain_error("MediumParams: k must be > 0");
    if (!(mu > 0.0)) throw domain_error("MediumParams: mu must be > 0");
}

namespace {

// All internals run on the covolume offset off = v - 1. Every formula here
// needs 1/(v-1) and ln(v-1); reconstructing v-1 from a double v loses ~1e-12
// relative accuracy at off ~ 1e-4, which the quadrature then amplifies into
// runaway refinement. Keeping off primary removes the cancellation.

struct SigmaDerivs {
    double sigma;
    double sigma_v;
    double sigma_T;
};

SigmaDerivs sigma_derivs_off(double off, double T, double n) {
    if (!(off > 0.0) || !(T > 0.0)) {
        throw domain_error("isentrope: need v > 1 and T > 0");
    }
    const double v = 1.0 + off;
    const double vp1 = 2.0 + off;
    const double L = -std::log1p(1.0 / v);
    const double t32 = std::pow(T, -1.5);
    SigmaDerivs s{};
    s.sigma = 0.5 * n * std::log(T) + std::log(off) + 0.5 * t32 * L;
    s.sigma_v = 1.0 / off + 0.5 * t32 / (v * vp1);
    s.sigma_T = 0.5 * n / T - 0.75 * (t32 / T) * L;
    return s;
}

double pressure_off(double off, double T) {
    const double v = 1.0 + off;
    const double vp1 = 2.0 + off;
    return T / off - 1.0 / (std::sqrt(T) * v * vp1);
}

// dp/dv along the isentrope at known T; p_T coincides with sigma_v (the
// Maxwell pair of this potential).
double dp_dv_off_at(double off, double T, double n) {
    const double v = 1.0 + off;
    const double vp1 = 2.0 + off;
    const double t32 = std::pow(T, -1.5);
    const double phi_vv =
        -1.0 / (off * off) + t32 * (2.0 * v + 1.0) / (v * v * vp1 * vp1);
    const double p_v = T * phi_vv;
    const SigmaDerivs s = sigma_derivs_off(off, T, n);
    return p_v - s.sigma_v * s.sigma_v / s.sigma_T;
}

double temperature_off(double off, double sigma0, double n,
                       std::optional<double> seed) {
    if (!(off > 0.0) || !std::isfinite(off)) {
        throw domain_error("temperature: v must be > 1");
    }
    const auto f = [&](double T) {
        return sigma_derivs_off(off, T, n).sigma - sigma0;
    };

    double lo, hi;
    if (seed && *seed > 0.0) {
        lo = 0.9 * *seed;
        hi = 1.1 * *seed;
    } else if (n == 3.0) {
        const AsymptoticCoeffs ac = asymptotic_coeffs(sigma0);
        const double g_inf = std::pow(ac.B_star * (1.0 + off), -2.0 / 3.0);
        const double g_one = std::pow(ac.B / off, 2.0 / 3.0);
        lo = 0.1 * std::min(g_inf, g_one);
        hi = 10.0 * std::max(g_inf, g_one);
    } else {
        const double g = std::exp(2.0 * (sigma0 - std::log(off)) / n);
        lo = 0.1 * g;
        hi = 10.0 * g;
    }

    Bracket br{};
    try {
        br = expand_bracket(f, lo, hi, 0.0);
    } catch (const bracketing_error&) {
        std::ostringstream msg;
        msg << "temperature: failed to bracket T at v = " << 1.0 + off
            << ", sigma0 = " << sigma0;
        throw bracketing_error(msg.str());
    }
    double T = find_root(f, br, 1e-12 * br.hi);
    // Newton polish: sigma is strictly increasing in T, so a couple of steps
    // reach machine-precision residuals regardless of the bracket scale.
    for (int i = 0; i < 4; ++i) {
        const SigmaDerivs s = sigma_derivs_off(off, T, n);
        const double step = (s.sigma - sigma0) / s.sigma_T;
        T -= step;
        if (std::abs(step) < 1e-16 * T) break;
    }
    return T;
}

// Tail expansion at v -> inf for n = 3:
//   T = (B* v)^{-2/3} (1 + t1/v + t2/v^2 + ...)
//   p = c v^{-5/3} + d v^{-8/3} + g v^{-11/3} + ...
//   Q = -(k/mu) [ (5c/8) v^{-8/3} + (8d/11) v^{-11/3} + (11g/14) v^{-14/3} + ... ]
struct TailCoeffs {
    double c;
    double d;
    double g;
};

TailCoeffs tail_coeffs(const AsymptoticCoeffs& ac) {
    const double B = ac.B_star;
    const double Bm23 = std::pow(B, -2.0 / 3.0);
    const double Bp13 = std::pow(B, 1.0 / 3.0);
    const double t1 = (4.0 - B) / (6.0 + 3.0 * B);
    const double t2 = ((0.75 + 15.0 * B / 16.0) * t1 * t1 + (3.0 * B / 8.0) * t1 +
                       0.5 + B / 6.0) /
                      (1.5 + 0.75 * B);
    TailCoeffs tc{};
    tc.c = Bm23 - Bp13;
    tc.d = Bm23 * (1.0 + t1) + Bp13 * (1.0 + 0.5 * t1);
    tc.g = Bm23 * (1.0 + t1 + t2) -
           Bp13 * (1.0 + 0.5 * t1 + 0.375 * t1 * t1 - 0.5 * t2);
    return tc;
}

double q_tail_eval(double v, const TailCoeffs& tc, const MediumParams& medium) {
    const double v83 = std::pow(v, 8.0 / 3.0);
    return -(medium.k / medium.mu) *
           ((5.0 * tc.c / 8.0) / v83 + (8.0 * tc.d / 11.0) / (v83 * v) +
            (11.0 * tc.g / 14.0) / (v83 * v * v));
}

// (k/mu) int p'(s)/s ds between offsets a and b, in unit log-offset panels.
// The integrand spans many orders of magnitude toward v -> 1, so each panel
// gets a tolerance tied to its own coarse estimate plus the running scale.
double segment_integral_off(double off_a, double off_b, const MediumParams& medium,
                            double anchor_scale,
                            const std::function<double(double)>& dp_at_off) {
    if (off_a == off_b) return 0.0;
    if (off_a > off_b) {
        return -segment_integral_off(off_b, off_a, medium, anchor_scale, dp_at_off);
    }
    const auto f = [&](double w) {
        const double off = std::exp(w);
        return dp_at_off(off) * off / (1.0 + off);
    };
    const double w_a = std::log(off_a);
    const double w_b = std::log(off_b);
    const int n_panels = std::max(1, static_cast<int>(std::ceil(w_b - w_a)));
    const double dw = (w_b - w_a) / n_panels;

    std::vector<double> rough(n_panels);
    std::vector<double> fmax(n_panels);
    double rough_total = 0.0;
    for (int i = 0; i < n_panels; ++i) {
        const double lo = w_a + i * dw;
        const double f0 = f(lo), f1 = f(lo + 0.5 * dw), f2 = f(lo + dw);
        rough[i] = (f0 + 4.0 * f1 + f2) * (dw / 6.0);
        fmax[i] = std::max({std::abs(f0), std::abs(f1), std::abs(f2)});
        rough_total += std::abs(rough[i]);
    }

    double total = 0.0;
    for (int i = 0; i < n_panels; ++i) {
        const double lo = w_a + i * dw;
        // Tolerance tied to the result scale with a floor at the integrand's
        // evaluation-noise level; no panel is refined past significance.
        const double tol = 1e-12 * (rough_total + anchor_scale) / n_panels +
                           1e-13 * std::abs(rough[i]) + 1e-15 * fmax[i] * dw +
                           1e-300;
        total += integrate(f, lo, lo + dw, tol);
    }
    return (medium.k / medium.mu) * total;
}

}  // namespace

AsymptoticCoeffs asymptotic_coeffs(double sigma0) {
    const auto f = [&](double b) { return 0.5 * b + std::log(b) + sigma0; };
    const auto br = expand_bracket(f, 0.05, 4.0, 0.0);
    AsymptoticCoeffs ac{};
    ac.B_star = find_root(f, br, 1e-12);
    for (int i = 0; i < 3; ++i) {
        ac.B_star -= f(ac.B_star) / (0.5 + 1.0 / ac.B_star);
    }
    ac.c = std::pow(ac.B_star, -2.0 / 3.0) - std::pow(ac.B_star, 1.0 / 3.0);
    ac.B = std::exp(sigma0);
    return ac;
}

double temperature(double v, double sigma0, double n, std::optional<double> seed) {
    if (!(v > 1.0) || !std::isfinite(v)) {
        throw domain_error("temperature: v must be > 1");
    }
    return temperature_off(v - 1.0, sigma0, n, seed);
}

double pressure_on_isentrope(double v, double sigma0, double n) {
    const double off = v - 1.0;
    return pressure_off(off, temperature_off(off, sigma0, n, std::nullopt));
}

double dp_dv(double v, double sigma0, double n) {
    const double off = v - 1.0;
    return dp_dv_off_at(off, temperature_off(off, sigma0, n, std::nullopt), n);
}

double q_potential(double v, double sigma0, const MediumParams& medium) {
    medium.validate();
    if (!(v > 1.0)) throw domain_error("q_potential: v must be > 1");
    const TailCoeffs tc = tail_coeffs(asymptotic_coeffs(sigma0));
    if (v >= kTailSwitch) return q_tail_eval(v, tc, medium);

    double t_prev = -1.0;
    const auto dp = [&](double off) {
        const double T =
            temperature_off(off, sigma0, 3.0,
                            t_prev > 0.0 ? std::optional<double>(t_prev)
                                         : std::nullopt);
        t_prev = T;
        return dp_dv_off_at(off, T, 3.0);
    };
    const double anchor = q_tail_eval(kTailSwitch, tc, medium);
    return anchor + segment_integral_off(v - 1.0, kTailSwitch - 1.0, medium,
                                         std::abs(anchor), dp);
}

double h_function(double v) {
    if (!(v > 1.0)) throw domain_error("h_function: v must be > 1");
    const double off = v - 1.0;
    const auto G = [&](double T) {
        const double vv = 1.0 + off;
        const double vp1 = 2.0 + off;
        const double t32 = std::pow(T, -1.5);
        const double phi_vv =
            -1.0 / (off * off) + t32 * (2.0 * vv + 1.0) / (vv * vv * vp1 * vp1);
        const SigmaDerivs s = sigma_derivs_off(off, T, 3.0);
        return T * phi_vv * s.sigma_T - s.sigma_v * s.sigma_v;
    };
    // dp/dv can only vanish where p_v > 0, i.e. inside the spinodal region,
    // so the root lies below T_sp(v). March down until G turns positive.
    const double T_sp = eos::spinodal_temperature(v);
    double hi = T_sp * (1.0 - 1e-9);
    if (!(G(hi) < 0.0)) {
        throw bracketing_error("h_function: G not negative just below the spinodal");
    }
    double lo = hi;
    for (int i = 0; i < 4000; ++i) {
        lo *= 0.7;
        if (G(lo) >= 0.0) break;
        hi = lo;
        if (lo < 1e-280) {
            std::ostringstream msg;
            msg << "h_function: no root of G below the spinodal at v = " << v;
            throw bracketing_error(msg.str());
        }
    }
    const double T_root = find_root(G, Bracket::from(G, lo, hi), 1e-14 * hi);
    return sigma_derivs_off(off, T_root, 3.0).sigma;
}

double sigma_star() {
    const double h1 = h_function(1e3);
    const double h2 = h_function(1e4);
    const double h3 = h_function(1e5);
    // Aitken extrapolation of the geometric tail H(v) - sigma* ~ A v^{-alpha}.
    const double d1 = h2 - h1;
    const double d2 = h3 - h2;
    const double denom = d2 - d1;
    if (std::abs(denom) < 1e-15) return h3;
    return h3 - d2 * d2 / denom;
}

bool q_monotone(double sigma0, int samples, double v_offset_min,
                double v_offset_max) {
    // Q'(v) = -(k/mu) p'(v)/v, so monotone Q is exactly dp/dv < 0 everywhere.
    const double w_lo = std::log(v_offset_min);
    const double w_hi = std::log(v_offset_max);
    double t_prev = -1.0;
    for (int i = 0; i < samples; ++i) {
        const double off = std::exp(w_lo + (w_hi - w_lo) * i / (samples - 1.0));
        const double T =
            temperature_off(off, sigma0, 3.0,
                            t_prev > 0.0 ? std::optional<double>(t_prev)
                                         : std::nullopt);
        t_prev = T;
        if (!(dp_dv_off_at(off, T, 3.0) < 0.0)) return false;
    }
    return true;
}

Isentrope Isentrope::build(double sigma0, MediumParams medium, double v_max,
                           int knots) {
    medium.validate();
    if (!(v_max > 1.0 + 1e-5)) throw domain_error("Isentrope: v_max too small");
    if (knots < 16) throw domain_error("Isentrope: need at least 16 knots");

    Isentrope iso;
    iso.sigma0_ = sigma0;
    iso.medium_ = medium;
    iso.coeffs_ = asymptotic_coeffs(sigma0);
    const TailCoeffs tc = tail_coeffs(iso.coeffs_);
    iso.tail_d_ = tc.d;
    iso.tail_g_ = tc.g;

    const double w_lo = std::log(1e-6);
    const double w_hi = std::log(v_max - 1.0);
    iso.off_.resize(knots);
    iso.v_.resize(knots);
    iso.t_.resize(knots);
    iso.p_.resize(knots);
    iso.q_.resize(knots);
    for (int i = 0; i < knots; ++i) {
        iso.off_[i] = std::exp(w_lo + (w_hi - w_lo) * i / (knots - 1.0));
        iso.v_[i] = 1.0 + iso.off_[i];
    }

    // Temperatures march top-down, each seeding the next solve.
    std::optional<double> seed;
    for (int i = knots - 1; i >= 0; --i) {
        iso.t_[i] = temperature_off(iso.off_[i], sigma0, 3.0, seed);
        seed = iso.t_[i];
        iso.p_[i] = pressure_off(iso.off_[i], iso.t_[i]);
    }

    // Invertibility: the tail sign (c) plus dp/dv < 0 on knots and midpoints.
    bool monotone = tc.c > 0.0;
    for (int i = 0; i < knots && monotone; ++i) {
        if (!(dp_dv_off_at(iso.off_[i], iso.t_[i], 3.0) < 0.0)) monotone = false;
        if (monotone && i + 1 < knots) {
            const double om = std::sqrt(iso.off_[i] * iso.off_[i + 1]);
            const double tm = temperature_off(om, sigma0, 3.0, iso.t_[i]);
            if (!(dp_dv_off_at(om, tm, 3.0) < 0.0)) monotone = false;
        }
    }
    iso.invertible_ = monotone;

    // Q accumulates downward from the closed tail anchor.
    double upper_off = v_max - 1.0;
    double q_upper = iso.tail(std::max(v_max, kTailSwitch));
    if (v_max < kTailSwitch) {
        q_upper += iso.segment_off(v_max - 1.0, kTailSwitch - 1.0, q_upper);
    }
    for (int i = knots - 1; i >= 0; --i) {
        iso.q_[i] = q_upper + iso.segment_off(iso.off_[i], upper_off, q_upper);
        upper_off = iso.off_[i];
        q_upper = iso.q_[i];
    }

    iso.q_inf_ = -std::numeric_limits<double>::infinity();
    iso.q_sup_ = iso.invertible_
                     ? 0.0
                     : std::max(0.0, *std::max_element(iso.q_.begin(), iso.q_.end()));
    return iso;
}

double Isentrope::tail(double v) const {
    TailCoeffs tc{coeffs_.c, tail_d_, tail_g_};
    return q_tail_eval(v, tc, medium_);
}

double Isentrope::seed_from_table(double off) const {
    // Log-interpolation of the knot temperatures; the exact solve runs after.
    if (off_.empty() || off < off_.front() || off > off_.back()) return -1.0;
    const auto it = std::upper_bound(off_.begin(), off_.end(), off);
    std::size_t j = static_cast<std::size_t>(it - off_.begin());
    if (j == 0) j = 1;
    if (j >= off_.size()) j = off_.size() - 1;
    const std::size_t i = j - 1;
    const double w = (std::log(off) - std::log(off_[i])) /
                     (std::log(off_[j]) - std::log(off_[i]));
    return std::exp((1.0 - w) * std::log(t_[i]) + w * std::log(t_[j]));
}

double Isentrope::temperature(double v) const {
    if (!(v > 1.0)) throw domain_error("Isentrope::temperature: v must be > 1");
    const double off = v - 1.0;
    const double seed = seed_from_table(off);
    return temperature_off(off, sigma0_, 3.0,
                           seed > 0.0 ? std::optional<double>(seed) : std::nullopt);
}

double Isentrope::pressure(double v) const {
    const double off = v - 1.0;
    return pressure_off(off, temperature(v));
}

double Isentrope::dp_dv(double v) const {
    const double off = v - 1.0;
    return dp_dv_off_at(off, temperature(v), 3.0);
}

double Isentrope::segment_off(double off_a, double off_b, double q_scale) const {
    double t_prev = -1.0;
    const auto dp = [&](double off) {
        double seed = t_prev;
        if (seed <= 0.0) seed = seed_from_table(off);
        const double T =
            temperature_off(off, sigma0_, 3.0,
                            seed > 0.0 ? std::optional<double>(seed) : std::nullopt);
        t_prev = T;
        return dp_dv_off_at(off, T, 3.0);
    };
    return segment_integral_off(off_a, off_b, medium_, std::abs(q_scale), dp);
}

double Isentrope::q(double v) const {
    if (!(v > 1.0)) throw domain_error("Isentrope::q: v must be > 1");
    if (v >= kTailSwitch) return tail(v);
    const double off = v - 1.0;
    // Anchor at the nearest knot at or above v (top knot if beyond the table).
    const auto it = std::lower_bound(off_.begin(), off_.end(), off);
    if (it == off_.end()) {
        return q_.back() + segment_off(off, off_.back(), q_.back());
    }
    const std::size_t j = static_cast<std::size_t>(it - off_.begin());
    return q_[j] + segment_off(off, off_[j], q_[j]);
}

double invert_q(const Isentrope& iso, double q) {
    if (!std::isfinite(q)) {
        throw range_error("invert_q: q must be finite", range_error::side::below);
    }
    if (!iso.invertible()) {
        // Best effort: list every branch volume crossing the requested level.
        std::vector<double> branches;
        const auto& vk = iso.v_knots();
        const auto& qk = iso.q_knots();
        for (std::size_t i = 0; i + 1 < vk.size(); ++i) {
            if ((qk[i] - q) * (qk[i + 1] - q) <= 0.0) {
                const auto g = [&](double v) { return iso.q(v) - q; };
                try {
                    branches.push_back(find_root(
                        g, Bracket{vk[i], vk[i + 1], qk[i] - q, qk[i + 1] - q},
                        1e-12 * vk[i + 1]));
                } catch (const bracketing_error&) {
                }
            }
        }
        std::ostringstream msg;
        msg << "invert_q: Q is not monotone at sigma0 = " << iso.sigma0()
            << " (below the invertibility threshold); " << branches.size()
            << " branch solution(s) found. Select a branch policy explicitly.";
        throw multivalued_error(msg.str(), std::move(branches));
    }

    if (q >= iso.q_sup()) {
        std::ostringstream msg;
        msg << "invert_q: q = " << q << " at or above sup Q = " << iso.q_sup();
        throw range_error(msg.str(), range_error::side::above);
    }

    const auto& ok = iso.off_;
    const auto& qk = iso.q_;
    const auto g_off = [&](double off) { return iso.q(1.0 + off) - q; };

    if (q > qk.back()) {
        // Beyond the table toward v -> inf: invert the leading tail term.
        const double c = std::max(iso.coeffs_.c, 1e-300);
        const double v0 = std::pow(
            5.0 * iso.medium().k * c / (8.0 * iso.medium().mu * (-q)), 3.0 / 8.0);
        const double lo = std::max(ok.back(), 0.5 * v0 - 1.0);
        const auto br =
            expand_bracket(g_off, lo, std::max(2.0 * v0, 2.0 * lo + 2.0), 0.0);
        return 1.0 + find_root(g_off, br, 1e-11 * std::max(1.0, v0));
    }
    if (q < qk.front()) {
        // Below the table toward v -> 1: invert the near-covolume asymptote.
        const double B23 = std::pow(iso.coeffs_.B, 2.0 / 3.0);
        const double off0 =
            std::pow(iso.medium().k * B23 / (iso.medium().mu * (-q)), 3.0 / 5.0);
        double lo = 0.25 * off0;
        double hi = std::min(ok.front(), 4.0 * off0);
        if (!(lo < hi)) lo = 0.01 * hi;
        const auto br = expand_bracket(g_off, lo, hi, 0.0);
        return 1.0 + find_root(g_off, br, 1e-13 * hi);
    }

    // Inside the table: binary search the knot segment, then refine on iso.q.
    std::size_t lo = 0, hi = ok.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (qk[mid] <= q) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double off = find_root(g_off,
                                 Bracket{ok[lo], ok[hi], qk[lo] - q, qk[hi] - q},
                                 1e-13 * std::max(1e-30, ok[hi]));
    return 1.0 + off;
}

}  // namespace rkflow::isentrope
