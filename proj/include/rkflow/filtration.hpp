#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "rkflow/eos.hpp"
#include "rkflow/isentrope.hpp"
#include "rkflow/phase.hpp"

namespace rkflow::filtration {

using Vec3 = std::array<double, 3>;

struct Source {
    Vec3 position;
    double intensity;  // coefficient of 1/(4*pi*|x - a|), sign free
};

/// Point sources plus the far-field volume; entropy level and medium live on
/// the Isentrope the field is solved against.
struct SourceSystem {
    std::vector<Source> sources;
    double far_field_v = 10.0;
};

/// Axis-aligned box with node counts per axis. Node (i1,i2,i3) sits at
/// lower + (i1*h1, i2*h2, i3*h3); storage is x3-major (x1 varies fastest),
/// matching the legacy VTK point order.
struct BoxDomain {
    Vec3 lower{-1.0, -1.0, -1.0};
    Vec3 upper{1.0, 1.0, 1.0};
    std::array<int, 3> resolution{17, 17, 17};

    void validate() const;
    std::array<double, 3> spacing() const;
    std::size_t node_count() const;
    std::size_t index(int i1, int i2, int i3) const;
    Vec3 position(int i1, int i2, int i3) const;
    bool is_boundary(int i1, int i2, int i3) const;
    bool contains_strictly(const Vec3& x) const;
    double cell_diagonal() const;
};

enum class SolveMode { free_space, dirichlet_box };

enum class NodeMask : std::uint8_t {
    valid = 0,
    near_source_excluded = 1,
    out_of_range = 2,
};

struct FieldSummary {
    std::size_t nodes = 0;
    std::size_t valid = 0;
    std::size_t excluded = 0;
    std::size_t out_of_range = 0;
    std::array<std::size_t, 5> label_counts{};  // indexed by PhaseLabel over valid nodes
    double u_min = 0.0;
    double u_max = 0.0;
    int harmonic_iterations = 0;
    double harmonic_residual = 0.0;
};

/// Solved 3-D field: per node v, T, p, the harmonic potential u, phase label
/// and mask. Labels are meaningful on valid nodes only.
struct PhaseField {
    BoxDomain domain;
    double sigma0 = 0.0;
    double far_field_v = 0.0;
    std::vector<double> v, T, p, u;
    std::vector<phase::PhaseLabel> label;
    std::vector<NodeMask> mask;
    FieldSummary summary;
};

/// Superposed fundamental solutions plus the far-field constant Q(v0); the
/// unique bounded harmonic function with that far-field value.
double u_free_space(const Vec3& x, const SourceSystem& sys,
                    const isentrope::Isentrope& iso);

struct HarmonicResult {
    std::vector<double> u;
    int iterations = 0;
    double residual = 0.0;  // relative, scaled by the boundary data magnitude
};

/// Dirichlet solve of the 7-point discrete Laplace equation on the box by
/// red-black SOR, relative residual < tol. Deterministic sweep order.
HarmonicResult solve_harmonic(const BoxDomain& domain,
                              const std::function<double(const Vec3&)>& boundary,
                              double tol = 1e-10, int max_iter = 0);

struct FieldOptions {
    /// Nodes within this distance of a source are masked; <= 0 means one grid
    /// cell diagonal.
    double exclusion_radius = -1.0;
    /// Allow solving on a non-invertible isentrope by picking the monotone
    /// branch of Q connected to far_field_v; nodes falling off that branch
    /// are masked out-of-range.
    bool allow_noninvertible_branch = false;
    double harmonic_tol = 1e-10;
};

PhaseField solve_field(const SourceSystem& sys, const BoxDomain& domain,
                       SolveMode mode, const isentrope::Isentrope& iso,
                       const phase::CoexistenceCurve& curve,
                       const eos::GasModel& gas, const FieldOptions& options = {});

struct SourceReport {
    std::size_t index = 0;
    bool feasible = true;
    double u_at_exclusion = 0.0;      // worst u on the exclusion sphere
    double max_positive_intensity = 0.0;  // largest J keeping u < 0 there
    double worst_u_on_segment = 0.0;  // max u sampled toward nearest neighbor
};

struct ValidationReport {
    bool all_feasible = true;
    double q_far_field = 0.0;
    std::vector<SourceReport> sources;
};

/// Feasibility survey: u must stay inside Q's range (negative) outside the
/// exclusion balls. Report-only, never throws on infeasible data.
ValidationReport validate_sources(const SourceSystem& sys,
                                  const isentrope::Isentrope& iso,
                                  double exclusion_radius);

}  // namespace rkflow::filtration
