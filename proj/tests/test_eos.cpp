#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rkflow/eos.hpp"
#include "rkflow/numerics.hpp"

using namespace rkflow;
using namespace rkflow::eos;

TEST_CASE("potential: hand values at (v=2, T=1, n=3)") {
    const auto d = potential(2.0, 1.0, 3.0);
    CHECK(d.phi == doctest::Approx(-std::log(2.0 / 3.0)).epsilon(1e-14));
    CHECK(d.phi_v == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
    // phi_T = n/2 + (3/2) ln(2/3) at T=1
    CHECK(d.phi_T == doctest::Approx(1.5 + 1.5 * std::log(2.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("potential: partials match central finite differences") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uv(1.2, 30.0);
    std::uniform_real_distribution<double> uT(0.05, 3.0);
    const double h = 1e-5;
    for (int i = 0; i < 200; ++i) {
        const double v = uv(rng);
        const double T = uT(rng);
        const auto d = potential(v, T);
        const auto fd_v = (potential(v + h, T).phi - potential(v - h, T).phi) / (2 * h);
        const auto fd_T = (potential(v, T + h).phi - potential(v, T - h).phi) / (2 * h);
        const auto fd_vv =
            (potential(v + h, T).phi_v - potential(v - h, T).phi_v) / (2 * h);
        const auto fd_TT =
            (potential(v, T + h).phi_T - potential(v, T - h).phi_T) / (2 * h);
        const auto fd_vT =
            (potential(v, T + h).phi_v - potential(v, T - h).phi_v) / (2 * h);
        const auto fd_vvv =
            (potential(v + h, T).phi_vv - potential(v - h, T).phi_vv) / (2 * h);
        const double scale_T = std::max(1.0, std::abs(d.phi_T));
        CHECK(std::abs(d.phi_v - fd_v) < 1e-7 * std::max(1.0, std::abs(d.phi_v)));
        CHECK(std::abs(d.phi_T - fd_T) < 1e-6 * scale_T);
        CHECK(std::abs(d.phi_vv - fd_vv) < 1e-6 * std::max(1.0, std::abs(d.phi_vv)));
        CHECK(std::abs(d.phi_TT - fd_TT) < 1e-5 * std::max(1.0, std::abs(d.phi_TT)));
        CHECK(std::abs(d.phi_vT - fd_vT) < 1e-6 * std::max(1.0, std::abs(d.phi_vT)));
        CHECK(std::abs(d.phi_vvv - fd_vvv) < 1e-5 * std::max(1.0, std::abs(d.phi_vvv)));
    }
}

TEST_CASE("potential: mixed partial symmetry (phi_vT by both routes)") {
    const double h = 1e-6;
    for (double v : {1.5, 2.0, 5.0, 50.0}) {
        for (double T : {0.2, 1.0, 2.5}) {
            const auto d = potential(v, T);
            const double dTdv =
                (potential(v + h, T).phi_T - potential(v - h, T).phi_T) / (2 * h);
            CHECK(std::abs(d.phi_vT - dTdv) < 1e-7 * std::max(1.0, std::abs(d.phi_vT)));
        }
    }
}

TEST_CASE("state: hand values at (v=2, T=1, n=3)") {
    const auto s = state(2.0, 1.0, 3.0);
    CHECK(s.p == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
    CHECK(s.e == doctest::Approx(1.5 + 1.5 * std::log(2.0 / 3.0)).epsilon(1e-13));
    CHECK(s.sigma == doctest::Approx(0.5 * std::log(2.0 / 3.0)).epsilon(1e-13));
    CHECK(s.p == doctest::Approx(0.833333).epsilon(1e-6));
    CHECK(s.e == doctest::Approx(0.891802).epsilon(1e-5));
    CHECK(s.sigma == doctest::Approx(-0.202733).epsilon(1e-5));
}

TEST_CASE("state: pressure matches the displayed reduced equation of state") {
    for (double v : {1.2, 2.0, 7.0, 100.0}) {
        for (double T : {0.1, 0.5, 2.0}) {
            const auto s = state(v, T);
            const double direct =
                T / (v - 1.0) - 1.0 / (std::sqrt(T) * v * (v + 1.0));
            CHECK(s.p == doctest::Approx(direct).epsilon(1e-13));
        }
    }
}

TEST_CASE("sigma differs from phi + T phi_T by exactly n/2") {
    for (double n : {1.0, 3.0, 5.0}) {
        for (double v : {1.3, 2.0, 40.0}) {
            for (double T : {0.2, 1.0, 4.0}) {
                const auto d = potential(v, T, n);
                const auto s = state(v, T, n);
                CHECK(s.sigma - (d.phi + T * d.phi_T) ==
                      doctest::Approx(-0.5 * n).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("compatibility identity e_v = T^2 d(p/T)/dT") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uv(1.1, 80.0);
    std::uniform_real_distribution<double> uu(0.02, 3.0);
    const double h = 1e-5;
    int checked = 0;
    for (int i = 0; i < 300 && checked < 50; ++i) {
        const double v = uv(rng);
        const double T = spinodal_temperature(v) + uu(rng);
        if (!is_applicable(v, T)) continue;
        ++checked;
        const double e_v = (state(v + h, T).e - state(v - h, T).e) / (2 * h);
        const double dpT =
            (state(v, T + h).p / (T + h) - state(v, T - h).p / (T - h)) / (2 * h);
        CHECK(std::abs(e_v - T * T * dpT) < 1e-7 * std::max(1.0, std::abs(e_v)));
    }
    CHECK(checked == 50);
}

TEST_CASE("kappa: hand value and global k_TT sign") {
    const auto k = kappa(2.0, 1.0, 3.0);
    CHECK(k.k_vv == doctest::Approx(-31.0 / 36.0).epsilon(1e-13));
    CHECK(k.k_TT < 0.0);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uv(1.0 + 1e-6, 1e4);
    std::uniform_real_distribution<double> uT(1e-4, 50.0);
    for (int i = 0; i < 500; ++i) {
        CHECK(kappa(uv(rng), uT(rng)).k_TT < 0.0);
    }
}

TEST_CASE("kappa: k_vv equals phi_vv and vanishes on the spinodal") {
    for (double v : {1.5, 2.0, 3.0, 10.0}) {
        for (double T : {0.2, 0.5, 1.0}) {
            CHECK(kappa(v, T).k_vv ==
                  doctest::Approx(potential(v, T).phi_vv).epsilon(1e-11));
        }
        const double Tsp = spinodal_temperature(v);
        CHECK(std::abs(kappa(v, Tsp).k_vv) < 1e-12);
    }
}

TEST_CASE("is_applicable: reference points and spinodal straddle") {
    CHECK(is_applicable(2.0, 1.0));
    CHECK_FALSE(is_applicable(2.0, 0.1));
    for (double v : {1.5, 2.0, 6.0, 30.0}) {
        const double Tsp = spinodal_temperature(v);
        CHECK(is_applicable(v, Tsp * (1.0 + 1e-9)));
        CHECK_FALSE(is_applicable(v, Tsp * (1.0 - 1e-9)));
    }
}

TEST_CASE("spinodal: closed form matches the phi_vv root to 1e-10") {
    for (int i = 0; i <= 80; ++i) {
        const double v = 1.01 * std::pow(100.0 / 1.01, i / 80.0);
        const double closed = spinodal_temperature(v);
        const auto f = [&](double T) { return potential(v, T).phi_vv; };
        const double solved = numerics::find_root(
            f, numerics::expand_bracket(f, 0.5 * closed, 2.0 * closed, 0.0), 1e-14);
        CHECK(std::abs(closed - solved) < 1e-10 * std::max(1.0, closed));
    }
    // Factorization note: 2v^3 - 3v^2 + 1 = (v-1)^2 (2v+1).
    for (double v : {1.2, 2.0, 9.0}) {
        CHECK(2.0 * v * v * v - 3.0 * v * v + 1.0 ==
              doctest::Approx((v - 1.0) * (v - 1.0) * (2.0 * v + 1.0)).epsilon(1e-14));
    }
}

TEST_CASE("spinodal: limit at v->1 and value at v=2") {
    CHECK(spinodal_temperature(1.0 + 1e-9) < 1e-5);
    CHECK(spinodal_temperature(2.0) ==
          doctest::Approx(std::pow(5.0 / 36.0, 2.0 / 3.0)).epsilon(1e-14));
    CHECK(spinodal_temperature(2.0) == doctest::Approx(0.26823).epsilon(1e-4));
}

TEST_CASE("critical point: analytic volume, spinodal apex, zero residuals") {
    const auto c = solve_critical_point();
    const double v_exact = 1.0 / (std::cbrt(2.0) - 1.0);
    CHECK(std::abs(c.v_c - v_exact) < 1e-8);
    CHECK(std::abs(c.T_c - spinodal_temperature(c.v_c)) < 1e-10);
    CHECK(c.T_c == doctest::Approx(0.345).epsilon(2e-3));

    const auto d = potential(c.v_c, c.T_c);
    CHECK(std::abs(d.phi_vv) < 1e-10);
    CHECK(std::abs(d.phi_vvv) < 1e-10);

    // Independent check: the spinodal maximum sits at the same volume.
    double best_v = 0.0, best_T = -1.0;
    for (int i = 0; i <= 20000; ++i) {
        const double v = 1.5 + i * (8.0 - 1.5) / 20000.0;
        const double T = spinodal_temperature(v);
        if (T > best_T) {
            best_T = T;
            best_v = v;
        }
    }
    CHECK(std::abs(best_v - c.v_c) < 1e-3);
    CHECK(best_T <= c.T_c + 1e-12);
}

TEST_CASE("GasModel caches the critical point") {
    const GasModel gas;
    const auto c = solve_critical_point();
    CHECK(gas.critical().v_c == doctest::Approx(c.v_c).epsilon(1e-14));
    CHECK(gas.critical().p_c == doctest::Approx(c.p_c).epsilon(1e-14));
}

TEST_CASE("ideal-gas limit: p v / T -> 1 as v -> infinity") {
    for (double T : {0.5, 1.0, 2.0}) {
        const double v = 1e7;
        CHECK(state(v, T).p * v / T == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("unit scaling: identity and round trip") {
    const GasParams unit{};
    const StateTuple x{1.0, 1.0, 2.0, 1.0, 0.0};
    const auto r = to_reduced(x, unit);
    CHECK(r.p == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.v == doctest::Approx(2.0).epsilon(1e-15));

    const GasParams params{3.0, 2.0, 0.5, 8.314};
    const auto round = from_reduced(to_reduced(x, params), params);
    CHECK(round.p == doctest::Approx(x.p).epsilon(1e-12));
    CHECK(round.T == doctest::Approx(x.T).epsilon(1e-12));
    CHECK(round.v == doctest::Approx(x.v).epsilon(1e-12));
    CHECK(round.e == doctest::Approx(x.e).epsilon(1e-12));
    CHECK(round.sigma == doctest::Approx(x.sigma).epsilon(1e-12));
}

TEST_CASE("unit scaling: v_physical = b * v_reduced with textbook RK constants") {
    // Methane-like critical data: Tc ~ 190.6 K, pc ~ 4.599e6 Pa, R = 8.314.
    const double R = 8.314, Tc = 190.6, pc = 4.599e6;
    const double b = 0.08664 * R * Tc / pc;
    const GasParams params{3.0, 3.222, b, R};
    const auto phys = from_reduced(StateTuple{0.0, 0.0, 5.0, 0.0, 0.0}, params);
    CHECK(phys.v == doctest::Approx(5.0 * b).epsilon(1e-14));
}

TEST_CASE("domain errors: hard rejection, never clamped") {
    CHECK_THROWS_AS(potential(0.5, 1.0), domain_error);
    CHECK_THROWS_AS(potential(1.0, 1.0), domain_error);
    CHECK_THROWS_AS(potential(2.0, 0.0), domain_error);
    CHECK_THROWS_AS(potential(2.0, -1.0), domain_error);
    CHECK_THROWS_AS(state(0.5, 1.0), domain_error);
    CHECK_THROWS_AS(kappa(1.0, 1.0), domain_error);
    CHECK_THROWS_AS(spinodal_temperature(1.0), domain_error);
    CHECK_THROWS_AS(GasModel(GasParams{3.0, -1.0, 1.0, 1.0}), domain_error);
}
