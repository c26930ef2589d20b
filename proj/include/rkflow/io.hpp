#pragma once

#include <string>
#include <vector>

#include "rkflow/filtration.hpp"
#include "rkflow/isentrope.hpp"
#include "rkflow/phase.hpp"

namespace rkflow::io {

/// All text output uses 12 significant digits ("%.12g"); re-reading an
/// emitted file and re-emitting it is byte-identical.
std::string format_value(double x);

struct Csv {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const Csv& table, const std::string& path);
Csv read_csv(const std::string& path);

Csv coexistence_table(const phase::CoexistenceCurve& curve);
Csv spinodal_table(double v_min, double v_max, int samples);
Csv isentrope_table(const isentrope::Isentrope& iso);
Csv hcurve_table(double v_min, double v_max, int samples);

/// k3-indexed plane of a phase field (columns x1,x2,x3,v,T,p,u,phase,mask).
Csv field_slice(const filtration::PhaseField& field, int i3);

/// Legacy VTK STRUCTURED_POINTS (ASCII) with point data v, T, p, phase, mask.
/// Point order is x1-fastest, matching the field's storage.
void write_vtk(const filtration::PhaseField& field, const std::string& path,
               const std::string& title = "rkflow phase field");

/// Scenario file for the filtration pipeline (JSON, nested sections). Unknown
/// keys are rejected with the offending key path.
struct ScenarioConfig {
    eos::GasParams gas;
    double sigma0 = 0.0;
    isentrope::MediumParams medium;
    filtration::SourceSystem system;
    filtration::BoxDomain domain;
    filtration::SolveMode mode = filtration::SolveMode::free_space;
    std::string output_dir = "out";
    bool write_vtk = true;
    std::vector<int> csv_slices;
    filtration::FieldOptions options;
    double curve_t_min = 0.15;
    int curve_steps = 200;
    double iso_v_max = 1e6;
    int iso_knots = 400;
};

ScenarioConfig load_scenario(const std::string& path);

}  // namespace rkflow::io
