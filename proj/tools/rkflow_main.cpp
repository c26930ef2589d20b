// rkflow: reduced Redlich-Kwong thermodynamics, coexistence curves and
// steady adiabatic filtration fields from the command line.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rkflow/eos.hpp"
#include "rkflow/filtration.hpp"
#include "rkflow/io.hpp"
#include "rkflow/isentrope.hpp"
#include "rkflow/phase.hpp"

using namespace rkflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;    // invalid input, domain or configuration
constexpr int kExitNumeric = 3;  // solver did not converge

void print_state_block(const char* title, double v, double T, double p, double e,
                       double sigma, double gamma) {
    std::cout << title << "\n";
    std::cout << "  v     = " << io::format_value(v) << "\n";
    std::cout << "  T     = " << io::format_value(T) << "\n";
    std::cout << "  p     = " << io::format_value(p) << "\n";
    std::cout << "  e     = " << io::format_value(e) << "\n";
    std::cout << "  sigma = " << io::format_value(sigma) << "\n";
    std::cout << "  gamma = " << io::format_value(gamma) << "\n";
}

int cmd_filtration(const std::string& config_path) {
    const io::ScenarioConfig cfg = io::load_scenario(config_path);
    const eos::GasModel gas(cfg.gas);
    const auto iso = isentrope::Isentrope::build(cfg.sigma0, cfg.medium, cfg.iso_v_max,
                                                 cfg.iso_knots);
    const auto curve =
        phase::trace_curve(cfg.curve_t_min, gas.critical().T_c, cfg.curve_steps, gas);

    const double r_excl = cfg.options.exclusion_radius > 0.0
                              ? cfg.options.exclusion_radius
                              : cfg.domain.cell_diagonal();
    const auto validation = filtration::validate_sources(cfg.system, iso, r_excl);
    std::cout << "q_far_field = " << io::format_value(validation.q_far_field) << "\n";
    for (const auto& sr : validation.sources) {
        std::cout << "source " << sr.index << ": "
                  << (sr.feasible ? "feasible" : "INFEASIBLE")
                  << " u_at_exclusion = " << io::format_value(sr.u_at_exclusion)
                  << " max_positive_intensity = "
                  << io::format_value(sr.max_positive_intensity) << "\n";
    }

    const auto field = filtration::solve_field(cfg.system, cfg.domain, cfg.mode, iso,
                                               curve, gas, cfg.options);

    std::filesystem::create_directories(cfg.output_dir);
    if (cfg.write_vtk) {
        io::write_vtk(field, cfg.output_dir + "/field.vtk");
    }
    std::vector<int> slices = cfg.csv_slices;
    if (slices.empty()) {
        slices.push_back(cfg.domain.resolution[2] / 2);
    }
    for (int k : slices) {
        io::write_csv(io::field_slice(field, k),
                      cfg.output_dir + "/slice_k" + std::to_string(k) + ".csv");
    }

    const auto& s = field.summary;
    std::cout << "nodes = " << s.nodes << "\n";
    std::cout << "valid = " << s.valid << "\n";
    std::cout << "excluded = " << s.excluded << "\n";
    std::cout << "out_of_range = " << s.out_of_range << "\n";
    for (int i = 0; i < 5; ++i) {
        std::cout << "phase_" << phase::to_string(static_cast<phase::PhaseLabel>(i))
                  << " = " << s.label_counts[i] << "\n";
    }
    std::cout << "u_min = " << io::format_value(s.u_min) << "\n";
    std::cout << "u_max = " << io::format_value(s.u_max) << "\n";
    if (cfg.mode == filtration::SolveMode::dirichlet_box) {
        std::cout << "harmonic_iterations = " << s.harmonic_iterations << "\n";
        std::cout << "harmonic_residual = " << io::format_value(s.harmonic_residual)
                  << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced Redlich-Kwong gas thermodynamics and filtration fields"};
    app.require_subcommand(1);

    // state
    double st_v = 2.0, st_T = 1.0, st_n = 3.0, st_a = 1.0, st_b = 1.0, st_R = 1.0;
    bool st_physical = false;
    auto* state = app.add_subcommand("state", "Evaluate the reduced state at (v, T)");
    state->add_option("--v", st_v, "Reduced specific volume (> 1)")->required();
    state->add_option("--T", st_T, "Reduced temperature (> 0)")->required();
    state->add_option("--n", st_n, "Degrees of freedom");
    state->add_flag("--physical", st_physical, "Also print physical-unit values");
    state->add_option("--a", st_a, "Attraction constant (physical)");
    state->add_option("--b", st_b, "Covolume (physical)");
    state->add_option("--R", st_R, "Gas constant (physical)");

    // spinodal
    double sp_vmin = 1.01, sp_vmax = 100.0;
    int sp_samples = 200;
    std::string sp_out = "spinodal.csv";
    auto* spinodal = app.add_subcommand("spinodal", "Emit the spinodal curve as CSV");
    spinodal->add_option("--vmin", sp_vmin, "Smallest volume (> 1)");
    spinodal->add_option("--vmax", sp_vmax, "Largest volume");
    spinodal->add_option("--samples", sp_samples, "Number of rows");
    spinodal->add_option("-o,--output", sp_out, "Output CSV path");

    // coexistence
    double cx_tmin = 0.15;
    std::optional<double> cx_tmax;
    int cx_steps = 200;
    std::string cx_out = "coexistence.csv";
    auto* coex = app.add_subcommand("coexistence", "Trace the coexistence curve to CSV");
    coex->add_option("--tmin", cx_tmin, "Lowest isotherm");
    coex->add_option("--tmax", cx_tmax, "Highest isotherm (default: T_c)");
    coex->add_option("--steps", cx_steps, "Continuation steps");
    coex->add_option("-o,--output", cx_out, "Output CSV path");

    // isentrope
    double is_sigma0 = 0.0, is_vmax = 1e6, is_k = 1.0, is_mu = 1.0;
    int is_knots = 400;
    std::string is_out = "isentrope.csv";
    auto* isen = app.add_subcommand("isentrope", "Tabulate an isentrope (v, T, p, Q)");
    isen->add_option("--sigma0", is_sigma0, "Entropy level")->required();
    isen->add_option("--vmax", is_vmax, "Largest tabulated volume");
    isen->add_option("--knots", is_knots, "Number of knots");
    isen->add_option("--k", is_k, "Permeability");
    isen->add_option("--mu", is_mu, "Dynamic viscosity");
    isen->add_option("-o,--output", is_out, "Output CSV path");

    // hcurve
    double hc_vmin = 1.05, hc_vmax = 1e5;
    int hc_samples = 120;
    std::string hc_out = "hcurve.csv";
    auto* hcurve = app.add_subcommand(
        "hcurve", "Emit H(v) (entropy level where dp/dv = 0) and sigma_star");
    hcurve->add_option("--vmin", hc_vmin, "Smallest volume");
    hcurve->add_option("--vmax", hc_vmax, "Largest volume");
    hcurve->add_option("--samples", hc_samples, "Number of rows");
    hcurve->add_option("-o,--output", hc_out, "Output CSV path");

    // filtration
    std::string ft_config;
    auto* filt = app.add_subcommand("filtration", "Solve a point-source scenario");
    filt->add_option("config", ft_config, "Scenario config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*state) {
            const auto s = eos::state(st_v, st_T, st_n);
            print_state_block("reduced", s.v, s.T, s.p, s.e, s.sigma, s.gamma);
            if (st_physical) {
                const eos::GasParams params{st_n, st_a, st_b, st_R};
                const auto phys = eos::from_reduced(
                    eos::StateTuple{s.p, s.T, s.v, s.e, s.sigma}, params);
                const double gamma_phys = s.gamma * eos::scale_factors(params).e;
                print_state_block("physical", phys.v, phys.T, phys.p, phys.e,
                                  phys.sigma, gamma_phys);
            }
        } else if (*spinodal) {
            io::write_csv(io::spinodal_table(sp_vmin, sp_vmax, sp_samples), sp_out);
            std::cout << "wrote " << sp_out << "\n";
        } else if (*coex) {
            const eos::GasModel gas;
            const double tmax = cx_tmax.value_or(gas.critical().T_c);
            const auto curve = phase::trace_curve(cx_tmin, tmax, cx_steps, gas);
            io::write_csv(io::coexistence_table(curve), cx_out);
            std::cout << "wrote " << cx_out << "\n";
        } else if (*isen) {
            const auto iso = isentrope::Isentrope::build(
                is_sigma0, isentrope::MediumParams{is_k, is_mu}, is_vmax, is_knots);
            io::write_csv(io::isentrope_table(iso), is_out);
            std::cout << "invertible = " << (iso.invertible() ? "true" : "false")
                      << "\n";
            std::cout << "q_sup = " << io::format_value(iso.q_sup()) << "\n";
            std::cout << "wrote " << is_out << "\n";
        } else if (*hcurve) {
            io::write_csv(io::hcurve_table(hc_vmin, hc_vmax, hc_samples), hc_out);
            std::cout << "sigma_star = " << io::format_value(isentrope::sigma_star())
                      << "\n";
            std::cout << "wrote " << hc_out << "\n";
        } else if (*filt) {
            return cmd_filtration(ft_config);
        }
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const range_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const convergence_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
