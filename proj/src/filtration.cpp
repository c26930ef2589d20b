#include "rkflow/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace rkflow::filtration {

using phase::PhaseLabel;

namespace {

constexpr double kFourPi = 4.0 * 3.14159265358979323846;

double dist(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double singular_part(const Vec3& x, const std::vector<Source>& sources) {
    double sum = 0.0;
    for (const auto& s : sources) {
        const double r = dist(x, s.position);
        if (r == 0.0) {
            throw domain_error("u_free_space: evaluation point coincides with a source");
        }
        sum += s.intensity / (kFourPi * r);
    }
    return sum;
}

// Simple deterministic parallel-for over [0, n): contiguous chunks, one per
// thread, disjoint writes only.
void parallel_nodes(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t chunks = std::min<std::size_t>(hw, std::max<std::size_t>(1, n / 4096));
    if (chunks <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(chunks);
    const std::size_t step = (n + chunks - 1) / chunks;
    for (std::size_t c = 0; c < chunks; ++c) {
        pool.emplace_back([&, c] {
            const std::size_t lo = c * step;
            const std::size_t hi = std::min(n, lo + step);
            try {
                if (lo < hi) body(lo, hi);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

void BoxDomain::validate() const {
    for (int d = 0; d < 3; ++d) {
        if (!(upper[d] > lower[d])) {
            throw config_error("BoxDomain: upper must exceed lower on every axis");
        }
        if (resolution[d] < 2) {
            throw config_error("BoxDomain: need at least 2 nodes per axis");
        }
    }
}

std::array<double, 3> BoxDomain::spacing() const {
    return {(upper[0] - lower[0]) / (resolution[0] - 1),
            (upper[1] - lower[1]) / (resolution[1] - 1),
            (upper[2] - lower[2]) / (resolution[2] - 1)};
}

std::size_t BoxDomain::node_count() const {
    return static_cast<std::size_t>(resolution[0]) * resolution[1] * resolution[2];
}

std::size_t BoxDomain::index(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i3) * resolution[1] + i2) * resolution[0] + i1;
}

Vec3 BoxDomain::position(int i1, int i2, int i3) const {
    const auto h = spacing();
    return {lower[0] + i1 * h[0], lower[1] + i2 * h[1], lower[2] + i3 * h[2]};
}

bool BoxDomain::is_boundary(int i1, int i2, int i3) const {
    return i1 == 0 || i1 == resolution[0] - 1 || i2 == 0 || i2 == resolution[1] - 1 ||
           i3 == 0 || i3 == resolution[2] - 1;
}

bool BoxDomain::contains_strictly(const Vec3& x) const {
    for (int d = 0; d < 3; ++d) {
        if (!(x[d] > lower[d] && x[d] < upper[d])) return false;
    }
    return true;
}

double BoxDomain::cell_diagonal() const {
    const auto h = spacing();
    return std::sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2]);
}

double u_free_space(const Vec3& x, const SourceSystem& sys,
                    const isentrope::Isentrope& iso) {
    if (!(sys.far_field_v > 1.0)) {
        throw domain_error("u_free_space: far_field_v must be > 1");
    }
    return singular_part(x, sys.sources) + iso.q(sys.far_field_v);
}

HarmonicResult solve_harmonic(const BoxDomain& domain,
                              const std::function<double(const Vec3&)>& boundary,
                              double tol, int max_iter) {
    domain.validate();
    const int n1 = domain.resolution[0];
    const int n2 = domain.resolution[1];
    const int n3 = domain.resolution[2];
    const auto h = domain.spacing();
    const double cx = 1.0 / (h[0] * h[0]);
    const double cy = 1.0 / (h[1] * h[1]);
    const double cz = 1.0 / (h[2] * h[2]);
    const double diag = 2.0 * (cx + cy + cz);

    HarmonicResult res;
    res.u.assign(domain.node_count(), 0.0);
    auto& u = res.u;

    double g_abs_max = 0.0;
    double g_sum = 0.0;
    std::size_t g_count = 0;
    for (int k = 0; k < n3; ++k) {
        for (int j = 0; j < n2; ++j) {
            for (int i = 0; i < n1; ++i) {
                if (!domain.is_boundary(i, j, k)) continue;
                const double g = boundary(domain.position(i, j, k));
                if (!std::isfinite(g)) {
                    throw domain_error("solve_harmonic: boundary value not finite");
                }
                u[domain.index(i, j, k)] = g;
                g_abs_max = std::max(g_abs_max, std::abs(g));
                g_sum += g;
                ++g_count;
            }
        }
    }
    const double g_mean = g_count ? g_sum / g_count : 0.0;
    for (int k = 1; k < n3 - 1; ++k) {
        for (int j = 1; j < n2 - 1; ++j) {
            for (int i = 1; i < n1 - 1; ++i) {
                u[domain.index(i, j, k)] = g_mean;
            }
        }
    }
    if (n1 < 3 || n2 < 3 || n3 < 3) {
        return res;  // no interior nodes
    }

    // Optimal SOR factor from the Jacobi spectral radius of the box stencil.
    const double rho = (cx * std::cos(M_PI / (n1 - 1)) + cy * std::cos(M_PI / (n2 - 1)) +
                        cz * std::cos(M_PI / (n3 - 1))) /
                       (cx + cy + cz);
    const double omega = 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));

    const double scale = diag * (g_abs_max + 1e-300);
    if (max_iter <= 0) max_iter = 200 + 100 * std::max({n1, n2, n3});

    const auto laplacian = [&](int i, int j, int k) {
        const std::size_t c = domain.index(i, j, k);
        return cx * (u[c - 1] + u[c + 1]) + cy * (u[c - n1] + u[c + n1]) +
               cz * (u[c - static_cast<std::size_t>(n1) * n2] +
                     u[c + static_cast<std::size_t>(n1) * n2]) -
               diag * u[c];
    };

    std::vector<double> history;
    for (int sweep = 1; sweep <= max_iter; ++sweep) {
        for (int color = 0; color < 2; ++color) {
            for (int k = 1; k < n3 - 1; ++k) {
                for (int j = 1; j < n2 - 1; ++j) {
                    for (int i = 1 + ((j + k + color) & 1); i < n1 - 1; i += 2) {
                        const std::size_t c = domain.index(i, j, k);
                        const double gauss =
                            (cx * (u[c - 1] + u[c + 1]) + cy * (u[c - n1] + u[c + n1]) +
                             cz * (u[c - static_cast<std::size_t>(n1) * n2] +
                                   u[c + static_cast<std::size_t>(n1) * n2])) /
                            diag;
                        u[c] += omega * (gauss - u[c]);
                    }
                }
            }
        }
        if (sweep % 4 == 0 || sweep == max_iter) {
            double r_max = 0.0;
            for (int k = 1; k < n3 - 1; ++k) {
                for (int j = 1; j < n2 - 1; ++j) {
                    for (int i = 1; i < n1 - 1; ++i) {
                        r_max = std::max(r_max, std::abs(laplacian(i, j, k)));
                    }
                }
            }
            res.residual = r_max / scale;
            res.iterations = sweep;
            history.push_back(res.residual);
            if (res.residual < tol) {
                return res;
            }
        }
    }
    std::ostringstream msg;
    msg << "solve_harmonic: no convergence after " << max_iter
        << " sweeps, relative residual " << res.residual
        << " (history tail in last_iterate)";
    if (history.size() > 10) {
        history.erase(history.begin(), history.end() - 10);
    }
    throw convergence_error(msg.str(), history, res.residual);
}

namespace {

// Monotone branch of Q containing v0 on a non-invertible isentrope, bounded
// by knots where the knot-to-knot Q differences change direction.
struct Branch {
    double v_lo;
    double v_hi;
    double q_min;
    double q_max;
    bool increasing;
};

Branch branch_through(const isentrope::Isentrope& iso, double v0) {
    const auto& vk = iso.v_knots();
    const auto& qk = iso.q_knots();
    std::size_t seg = 0;
    while (seg + 2 < vk.size() && vk[seg + 1] < v0) ++seg;
    const bool up = qk[seg + 1] > qk[seg];
    std::size_t lo = seg;
    while (lo > 0 && ((qk[lo] > qk[lo - 1]) == up)) --lo;
    std::size_t hi = seg + 1;
    while (hi + 1 < vk.size() && ((qk[hi + 1] > qk[hi]) == up)) ++hi;
    Branch b{};
    b.v_lo = vk[lo];
    b.v_hi = vk[hi];
    b.q_min = std::min(qk[lo], qk[hi]);
    b.q_max = std::max(qk[lo], qk[hi]);
    b.increasing = up;
    return b;
}

double invert_on_branch(const isentrope::Isentrope& iso, const Branch& b, double q) {
    const auto g = [&](double v) { return iso.q(v) - q; };
    const double g_lo = iso.q(b.v_lo) - q;
    const double g_hi = iso.q(b.v_hi) - q;
    return numerics::find_root(g, numerics::Bracket{b.v_lo, b.v_hi, g_lo, g_hi},
                               1e-12 * b.v_hi);
}

}  // namespace

PhaseField solve_field(const SourceSystem& sys, const BoxDomain& domain,
                       SolveMode mode, const isentrope::Isentrope& iso,
                       const phase::CoexistenceCurve& curve,
                       const eos::GasModel& gas, const FieldOptions& options) {
    domain.validate();
    if (!(sys.far_field_v > 1.0)) {
        throw config_error("solve_field: far_field_v must be > 1");
    }
    for (std::size_t i = 0; i < sys.sources.size(); ++i) {
        if (!domain.contains_strictly(sys.sources[i].position)) {
            std::ostringstream msg;
            msg << "solve_field: source " << i << " is not strictly inside the domain";
            throw config_error(msg.str());
        }
        for (std::size_t j = i + 1; j < sys.sources.size(); ++j) {
            if (dist(sys.sources[i].position, sys.sources[j].position) == 0.0) {
                throw config_error("solve_field: sources must be pairwise distinct");
            }
        }
    }
    if (!iso.invertible() && !options.allow_noninvertible_branch) {
        std::ostringstream msg;
        msg << "solve_field: Q is not invertible at sigma0 = " << iso.sigma0()
            << " (below the invertibility threshold ~ -0.5); enable the branch "
               "policy explicitly to solve on the branch connected to far_field_v";
        throw config_error(msg.str());
    }

    const double q0 = iso.q(sys.far_field_v);
    const double r_excl =
        options.exclusion_radius > 0.0 ? options.exclusion_radius : domain.cell_diagonal();

    PhaseField field;
    field.domain = domain;
    field.sigma0 = iso.sigma0();
    field.far_field_v = sys.far_field_v;
    const std::size_t n = domain.node_count();
    field.v.assign(n, std::numeric_limits<double>::quiet_NaN());
    field.T.assign(n, std::numeric_limits<double>::quiet_NaN());
    field.p.assign(n, std::numeric_limits<double>::quiet_NaN());
    field.u.assign(n, std::numeric_limits<double>::quiet_NaN());
    field.label.assign(n, PhaseLabel::Inapplicable);
    field.mask.assign(n, NodeMask::valid);

    std::vector<double> u0;
    if (mode == SolveMode::dirichlet_box) {
        const auto g = [&](const Vec3& x) { return q0 - singular_part(x, sys.sources); };
        auto hr = solve_harmonic(domain, g, options.harmonic_tol);
        u0 = std::move(hr.u);
        field.summary.harmonic_iterations = hr.iterations;
        field.summary.harmonic_residual = hr.residual;
    }

    Branch branch{};
    const bool branch_mode = !iso.invertible();
    if (branch_mode) {
        branch = branch_through(iso, sys.far_field_v);
    }

    // Entropy at the dew point of the curve's lowest isotherm: while sigma0
    // stays below it, any state beyond the curve's T coverage is inside the
    // dome, so those nodes are condensation without extrapolating the curve.
    const double sigma_dew_tmin =
        eos::state(curve.points().front().v_gas, curve.T_min(), gas.n()).sigma;

    const int n1 = domain.resolution[0];
    const int n2 = domain.resolution[1];

    parallel_nodes(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const int i1 = static_cast<int>(idx % n1);
            const int i2 = static_cast<int>((idx / n1) % n2);
            const int i3 = static_cast<int>(idx / (static_cast<std::size_t>(n1) * n2));
            const Vec3 x = domain.position(i1, i2, i3);

            double r_min = std::numeric_limits<double>::infinity();
            for (const auto& s : sys.sources) {
                r_min = std::min(r_min, dist(x, s.position));
            }
            if (r_min <= r_excl) {
                field.mask[idx] = NodeMask::near_source_excluded;
                if (r_min > 0.0) {
                    field.u[idx] = singular_part(x, sys.sources) +
                                   (u0.empty() ? q0 : u0[idx]);
                }
                continue;
            }

            const double u = singular_part(x, sys.sources) + (u0.empty() ? q0 : u0[idx]);
            field.u[idx] = u;

            const double q_hi_lim = branch_mode ? branch.q_max : iso.q_sup();
            const double q_lo_lim = branch_mode ? branch.q_min : iso.q_inf();
            if (!(u < q_hi_lim) || !(u > q_lo_lim)) {
                field.mask[idx] = NodeMask::out_of_range;
                continue;
            }

            const double v = branch_mode ? invert_on_branch(iso, branch, u)
                                         : isentrope::invert_q(iso, u);
            const double T = iso.temperature(v);
            field.v[idx] = v;
            field.T[idx] = T;
            field.p[idx] = eos::state(v, T, gas.n()).p;

            PhaseLabel label;
            try {
                label = phase::classify(v, T, curve, gas);
            } catch (const range_error&) {
                if (!gas.is_applicable(v, T)) {
                    label = PhaseLabel::Inapplicable;
                } else if (iso.sigma0() < sigma_dew_tmin) {
                    label = PhaseLabel::Condensation;
                } else {
                    throw config_error(
                        "solve_field: node temperature below the traced curve range; "
                        "retrace the coexistence curve with a lower T_min");
                }
            }
            field.label[idx] = label;
        }
    });

    auto& s = field.summary;
    s.nodes = n;
    s.u_min = std::numeric_limits<double>::infinity();
    s.u_max = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (std::isfinite(field.u[idx])) {
            s.u_min = std::min(s.u_min, field.u[idx]);
            s.u_max = std::max(s.u_max, field.u[idx]);
        }
        switch (field.mask[idx]) {
            case NodeMask::valid:
                ++s.valid;
                ++s.label_counts[static_cast<int>(field.label[idx])];
                break;
            case NodeMask::near_source_excluded:
                ++s.excluded;
                break;
            case NodeMask::out_of_range:
                ++s.out_of_range;
                break;
        }
    }
    if (s.valid == 0) {
        throw config_error(
            "solve_field: no valid nodes (intensities incompatible with Q's range "
            "or the exclusion radius covers the whole grid)");
    }
    return field;
}

ValidationReport validate_sources(const SourceSystem& sys,
                                  const isentrope::Isentrope& iso,
                                  double exclusion_radius) {
    if (!(sys.far_field_v > 1.0)) {
        throw domain_error("validate_sources: far_field_v must be > 1");
    }
    if (!(exclusion_radius > 0.0)) {
        throw domain_error("validate_sources: exclusion radius must be > 0");
    }
    ValidationReport report;
    report.q_far_field = iso.q(sys.far_field_v);
    const double q_sup = iso.invertible() ? 0.0 : iso.q_sup();

    for (std::size_t i = 0; i < sys.sources.size(); ++i) {
        const auto& src = sys.sources[i];
        SourceReport sr;
        sr.index = i;

        // Direction toward the nearest neighbour (x-axis for a lone source).
        Vec3 dir{1.0, 0.0, 0.0};
        double nearest = std::numeric_limits<double>::infinity();
        std::size_t j_near = i;
        for (std::size_t j = 0; j < sys.sources.size(); ++j) {
            if (j == i) continue;
            const double d = dist(src.position, sys.sources[j].position);
            if (d < nearest) {
                nearest = d;
                j_near = j;
            }
        }
        if (j_near != i && nearest > 0.0) {
            for (int d = 0; d < 3; ++d) {
                dir[d] = (sys.sources[j_near].position[d] - src.position[d]) / nearest;
            }
        }

        // Worst u over probe points on the exclusion sphere (6 axis points
        // plus the neighbour direction).
        double u_worst = -std::numeric_limits<double>::infinity();
        double u_other_at_worst = 0.0;
        std::vector<Vec3> probes;
        probes.push_back({src.position[0] + exclusion_radius * dir[0],
                          src.position[1] + exclusion_radius * dir[1],
                          src.position[2] + exclusion_radius * dir[2]});
        for (int d = 0; d < 3; ++d) {
            for (double sign : {-1.0, 1.0}) {
                Vec3 p = src.position;
                p[d] += sign * exclusion_radius;
                probes.push_back(p);
            }
        }
        for (const auto& p : probes) {
            const double u = u_free_space(p, sys, iso);
            if (u > u_worst) {
                u_worst = u;
                u_other_at_worst = u - src.intensity / (kFourPi * exclusion_radius);
            }
        }
        sr.u_at_exclusion = u_worst;
        sr.max_positive_intensity =
            std::max(0.0, kFourPi * exclusion_radius * (q_sup - u_other_at_worst));

        // March along the segment to the nearest neighbour, outside both
        // exclusion balls.
        sr.worst_u_on_segment = u_worst;
        if (j_near != i && nearest > 2.0 * exclusion_radius) {
            const int samples = 33;
            for (int k = 0; k <= samples; ++k) {
                const double t =
                    exclusion_radius / nearest +
                    (1.0 - 2.0 * exclusion_radius / nearest) * k / samples;
                Vec3 p;
                for (int d = 0; d < 3; ++d) {
                    p[d] = src.position[d] +
                           t * (sys.sources[j_near].position[d] - src.position[d]);
                }
                sr.worst_u_on_segment =
                    std::max(sr.worst_u_on_segment, u_free_space(p, sys, iso));
            }
        }

        sr.feasible = sr.u_at_exclusion < q_sup && sr.worst_u_on_segment < q_sup;
        report.all_feasible = report.all_feasible && sr.feasible;
        report.sources.push_back(sr);
    }
    return report;
}

}  // namespace rkflow::filtration
