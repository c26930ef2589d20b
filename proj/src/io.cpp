#include "rkflow/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "rkflow/errors.hpp"

namespace rkflow::io {

std::string format_value(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_csv(const Csv& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ',';
        out << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_value(row[c]);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

Csv read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    Csv table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != table.columns.size()) {
            throw std::runtime_error("read_csv: ragged row in " + path);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

Csv coexistence_table(const phase::CoexistenceCurve& curve) {
    Csv t;
    t.columns = {"T", "p_sat", "v_liquid", "v_gas"};
    for (const auto& pt : curve.points()) {
        t.rows.push_back({pt.T, pt.p_sat, pt.v_liquid, pt.v_gas});
    }
    return t;
}

Csv spinodal_table(double v_min, double v_max, int samples) {
    if (!(v_min > 1.0) || !(v_max > v_min) || samples < 2) {
        throw domain_error("spinodal_table: need 1 < v_min < v_max and samples >= 2");
    }
    Csv t;
    t.columns = {"v", "T", "p"};
    for (int i = 0; i < samples; ++i) {
        const double v = v_min * std::pow(v_max / v_min, i / (samples - 1.0));
        const double T = eos::spinodal_temperature(v);
        t.rows.push_back({v, T, eos::state(v, T).p});
    }
    return t;
}

Csv isentrope_table(const isentrope::Isentrope& iso) {
    Csv t;
    t.columns = {"v", "T", "p", "Q"};
    for (std::size_t i = 0; i < iso.v_knots().size(); ++i) {
        t.rows.push_back({iso.v_knots()[i], iso.t_knots()[i], iso.p_knots()[i],
                          iso.q_knots()[i]});
    }
    return t;
}

Csv hcurve_table(double v_min, double v_max, int samples) {
    if (!(v_min > 1.0) || !(v_max > v_min) || samples < 2) {
        throw domain_error("hcurve_table: need 1 < v_min < v_max and samples >= 2");
    }
    Csv t;
    t.columns = {"v", "H"};
    for (int i = 0; i < samples; ++i) {
        const double v = v_min * std::pow(v_max / v_min, i / (samples - 1.0));
        t.rows.push_back({v, isentrope::h_function(v)});
    }
    return t;
}

Csv field_slice(const filtration::PhaseField& field, int i3) {
    const auto& d = field.domain;
    if (i3 < 0 || i3 >= d.resolution[2]) {
        throw domain_error("field_slice: slice index out of range");
    }
    Csv t;
    t.columns = {"x1", "x2", "x3", "v", "T", "p", "u", "phase", "mask"};
    for (int j = 0; j < d.resolution[1]; ++j) {
        for (int i = 0; i < d.resolution[0]; ++i) {
            const auto idx = d.index(i, j, i3);
            const auto x = d.position(i, j, i3);
            t.rows.push_back({x[0], x[1], x[2], field.v[idx], field.T[idx],
                              field.p[idx], field.u[idx],
                              static_cast<double>(static_cast<int>(field.label[idx])),
                              static_cast<double>(static_cast<int>(field.mask[idx]))});
        }
    }
    return t;
}

void write_vtk(const filtration::PhaseField& field, const std::string& path,
               const std::string& title) {
    const auto& d = field.domain;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_vtk: cannot open " + path);
    const auto h = d.spacing();
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << d.resolution[0] << ' ' << d.resolution[1] << ' '
        << d.resolution[2] << '\n';
    out << "ORIGIN " << format_value(d.lower[0]) << ' ' << format_value(d.lower[1])
        << ' ' << format_value(d.lower[2]) << '\n';
    out << "SPACING " << format_value(h[0]) << ' ' << format_value(h[1]) << ' '
        << format_value(h[2]) << '\n';
    out << "POINT_DATA " << d.node_count() << '\n';

    const auto scalar = [&](const char* name, const std::vector<double>& data) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t i = 0; i < data.size(); ++i) {
            out << format_value(data[i]) << '\n';
        }
    };
    scalar("v", field.v);
    scalar("T", field.T);
    scalar("p", field.p);
    scalar("u", field.u);

    out << "SCALARS phase int 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < field.label.size(); ++i) {
        // Masked nodes carry no state; write -1 / -2 instead of a phase code.
        if (field.mask[i] == filtration::NodeMask::near_source_excluded) {
            out << "-1\n";
        } else if (field.mask[i] == filtration::NodeMask::out_of_range) {
            out << "-2\n";
        } else {
            out << static_cast<int>(field.label[i]) << '\n';
        }
    }
    out << "SCALARS mask int 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < field.mask.size(); ++i) {
        out << static_cast<int>(field.mask[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write_vtk: write failed for " + path);
}

namespace {

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw config_error("config: unknown key '" + path + key + "'");
        }
    }
}

filtration::Vec3 parse_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) {
        throw config_error("config: '" + path + "' must be an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("config: cannot open '" + path + "'");
    }
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config: ") + e.what());
    }

    reject_unknown_keys(root, "",
                        {"gas", "sigma0", "medium", "far_field_v", "sources", "domain",
                         "mode", "output", "tolerances", "exclusion_radius",
                         "allow_noninvertible_branch", "curve", "isentrope"});

    ScenarioConfig cfg;
    if (root.contains("gas")) {
        const auto& g = root["gas"];
        reject_unknown_keys(g, "gas.", {"n", "a", "b", "R"});
        cfg.gas.n = g.value("n", 3.0);
        cfg.gas.a = g.value("a", 1.0);
        cfg.gas.b = g.value("b", 1.0);
        cfg.gas.R = g.value("R", 1.0);
    }
    if (!root.contains("sigma0")) throw config_error("config: missing 'sigma0'");
    cfg.sigma0 = root["sigma0"].get<double>();
    if (root.contains("medium")) {
        const auto& m = root["medium"];
        reject_unknown_keys(m, "medium.", {"k", "mu"});
        cfg.medium.k = m.value("k", 1.0);
        cfg.medium.mu = m.value("mu", 1.0);
    }
    if (!root.contains("far_field_v")) throw config_error("config: missing 'far_field_v'");
    cfg.system.far_field_v = root["far_field_v"].get<double>();
    if (!root.contains("sources") || !root["sources"].is_array()) {
        throw config_error("config: 'sources' must be an array (may be empty)");
    }
    std::size_t si = 0;
    for (const auto& s : root["sources"]) {
        const std::string spath = "sources[" + std::to_string(si) + "].";
        reject_unknown_keys(s, spath, {"position", "intensity"});
        if (!s.contains("position") || !s.contains("intensity")) {
            throw config_error("config: '" + spath + "' needs position and intensity");
        }
        cfg.system.sources.push_back(filtration::Source{
            parse_vec3(s["position"], spath + "position"),
            s["intensity"].get<double>()});
        ++si;
    }
    if (!root.contains("domain")) throw config_error("config: missing 'domain'");
    {
        const auto& d = root["domain"];
        reject_unknown_keys(d, "domain.", {"lower", "upper", "resolution"});
        if (!d.contains("lower") || !d.contains("upper") || !d.contains("resolution")) {
            throw config_error("config: 'domain' needs lower, upper and resolution");
        }
        cfg.domain.lower = parse_vec3(d["lower"], "domain.lower");
        cfg.domain.upper = parse_vec3(d["upper"], "domain.upper");
        const auto& r = d["resolution"];
        if (!r.is_array() || r.size() != 3) {
            throw config_error("config: 'domain.resolution' must be 3 integers");
        }
        cfg.domain.resolution = {r[0].get<int>(), r[1].get<int>(), r[2].get<int>()};
    }
    if (root.contains("mode")) {
        const std::string mode = root["mode"].get<std::string>();
        if (mode == "free_space") {
            cfg.mode = filtration::SolveMode::free_space;
        } else if (mode == "dirichlet_box") {
            cfg.mode = filtration::SolveMode::dirichlet_box;
        } else {
            throw config_error("config: 'mode' must be free_space or dirichlet_box");
        }
    }
    if (root.contains("output")) {
        const auto& o = root["output"];
        reject_unknown_keys(o, "output.", {"directory", "vtk", "csv_slices"});
        cfg.output_dir = o.value("directory", std::string("out"));
        cfg.write_vtk = o.value("vtk", true);
        if (o.contains("csv_slices")) {
            for (const auto& k : o["csv_slices"]) {
                cfg.csv_slices.push_back(k.get<int>());
            }
        }
    }
    if (root.contains("tolerances")) {
        const auto& t = root["tolerances"];
        reject_unknown_keys(t, "tolerances.", {"harmonic"});
        cfg.options.harmonic_tol = t.value("harmonic", 1e-10);
    }
    if (root.contains("exclusion_radius")) {
        cfg.options.exclusion_radius = root["exclusion_radius"].get<double>();
    }
    if (root.contains("allow_noninvertible_branch")) {
        cfg.options.allow_noninvertible_branch =
            root["allow_noninvertible_branch"].get<bool>();
    }
    if (root.contains("curve")) {
        const auto& c = root["curve"];
        reject_unknown_keys(c, "curve.", {"t_min", "steps"});
        cfg.curve_t_min = c.value("t_min", 0.15);
        cfg.curve_steps = c.value("steps", 200);
    }
    if (root.contains("isentrope")) {
        const auto& i = root["isentrope"];
        reject_unknown_keys(i, "isentrope.", {"v_max", "knots"});
        cfg.iso_v_max = i.value("v_max", 1e6);
        cfg.iso_knots = i.value("knots", 400);
    }
    cfg.gas.validate();
    if (cfg.gas.n != 3.0) {
        throw config_error("config: the filtration pipeline requires n = 3");
    }
    return cfg;
}

}  // namespace rkflow::io
