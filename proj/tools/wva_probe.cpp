// wva-probe: figure reproductions and parameter sweeps for weak-value-amplified
// splitting measurements. All energies in units of Gamma, times in 1/Gamma.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wva/run.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kIoError = 4 };

// Flags given on the command line; they win over the config file and defaults.
struct Overrides {
    std::optional<double> e0, delta_e, gamma, delta, gamma_noise, cutoff, sigma, tau_c, t1,
        pump_rate, total_time, grid_half_width;
    std::optional<std::string> delta_range, delta_e_range, gamma_range, rate_range, ratio_range,
        inset_delta_range, inset_delta_es, mixing, method, delta_mode, out;
    std::optional<int> trials, grid_points, quad_order, quad_panels;
    std::optional<std::uint64_t> seed;
    bool svg = false;
};

void apply(wva::RunConfig& c, const Overrides& o) {
    using wva::Range;
    if (o.e0) c.e0 = *o.e0;
    if (o.delta_e) c.delta_e = *o.delta_e;
    if (o.gamma) c.gamma = *o.gamma;
    if (o.delta) c.delta = *o.delta;
    if (o.gamma_noise) c.gamma_noise = *o.gamma_noise;
    if (o.cutoff) c.cutoff = *o.cutoff;
    if (o.sigma) c.sigma = *o.sigma;
    if (o.tau_c) c.tau_c = *o.tau_c;
    if (o.t1) c.t1 = *o.t1;
    if (o.pump_rate) c.pump_rate = *o.pump_rate;
    if (o.total_time) c.total_time = *o.total_time;
    if (o.grid_half_width) c.grid_half_width = *o.grid_half_width;
    if (o.delta_range) c.delta_range = Range::parse(*o.delta_range);
    if (o.delta_e_range) c.delta_e_range = Range::parse(*o.delta_e_range);
    if (o.gamma_range) c.gamma_range = Range::parse(*o.gamma_range);
    if (o.rate_range) c.rate_range = Range::parse(*o.rate_range);
    if (o.ratio_range) c.ratio_range = Range::parse(*o.ratio_range);
    if (o.inset_delta_range) c.inset_delta_range = Range::parse(*o.inset_delta_range);
    if (o.inset_delta_es) c.inset_delta_es = wva::parse_list(*o.inset_delta_es);
    if (o.mixing) c.mixing = wva::parse_mixing(*o.mixing);
    if (o.method) c.method = wva::parse_snr_method(*o.method);
    if (o.delta_mode) c.delta_mode = wva::parse_delta_mode(*o.delta_mode);
    if (o.out) c.out = *o.out;
    if (o.trials) c.trials = *o.trials;
    if (o.grid_points) c.grid_points = *o.grid_points;
    if (o.quad_order) c.quad_order = *o.quad_order;
    if (o.quad_panels) c.quad_panels = *o.quad_panels;
    if (o.seed) c.seed = *o.seed;
    if (o.svg) c.svg = true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wva-probe: weak-value-amplified splitting spectroscopy simulations"};
    std::string command;
    std::string config_file;
    Overrides o;

    app.add_option("command", command, "fig1c | fig2 | fig3 | fig4 | shift | snr | sweep")
        ->required()
        ->check(CLI::IsMember({"fig1c", "fig2", "fig3", "fig4", "shift", "snr", "sweep"}));
    app.add_option("--config", config_file, "flat JSON config (e.g. a previous meta.json)");
    app.add_option("--e0", o.e0, "central energy E0");
    app.add_option("--delta-e", o.delta_e, "splitting dE / Gamma");
    app.add_option("--gamma", o.gamma, "linewidth Gamma (FWHM)");
    app.add_option("--delta", o.delta, "post-selection parameter; default: optimal");
    app.add_option("--delta-range", o.delta_range, "LO:HI:N[:linear|log|symlog]");
    app.add_option("--delta-e-range", o.delta_e_range, "splitting range (fig2, sweep)");
    app.add_option("--gamma-range", o.gamma_range, "dephasing widths (fig4)");
    app.add_option("--rate-range", o.rate_range, "pump rates (fig3), <= 1/T1");
    app.add_option("--ratio-range", o.ratio_range, "gamma_noise / dE values (fig4 inset)");
    app.add_option("--inset-delta-range", o.inset_delta_range, "delta values (fig3 inset)");
    app.add_option("--inset-delta-es", o.inset_delta_es, "comma list of dE (fig4 inset)");
    app.add_option("--gamma-noise", o.gamma_noise, "dephasing Lorentzian FWHM");
    app.add_option("--mixing", o.mixing, "paper_literal | probability_weighted");
    app.add_option("--cutoff", o.cutoff, "dephasing integral half-width; 0 = 50 max(gamma, Gamma)");
    app.add_option("--sigma", o.sigma, "per-event noise standard deviation");
    app.add_option("--tau-c", o.tau_c, "noise correlation time");
    app.add_option("--t1", o.t1, "excited-state lifetime");
    app.add_option("--pump-rate", o.pump_rate, "attempted events per unit time");
    app.add_option("--total-time", o.total_time, "run duration");
    app.add_option("--trials", o.trials, "Monte Carlo repetitions");
    app.add_option("--seed", o.seed, "64-bit master seed");
    app.add_option("--method", o.method, "analytic | monte_carlo");
    app.add_option("--delta-mode", o.delta_mode, "fixed | reoptimized (fig3 WVA column)");
    app.add_option("--grid-points", o.grid_points, "odd number of spectrum grid points");
    app.add_option("--grid-half-width", o.grid_half_width, "spectrum grid half-width");
    app.add_option("--quad-order", o.quad_order, "Gauss-Legendre nodes per panel");
    app.add_option("--quad-panels", o.quad_panels, "quadrature panels");
    app.add_option("--out", o.out, "output directory");
    app.add_flag("--svg", o.svg, "also write SVG renderings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        wva::RunConfig cfg = wva::default_config(wva::parse_command(command));
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw wva::ConfigError("cannot read config file '" + config_file + "'");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw wva::ConfigError(std::string("config file is not valid JSON: ") + e.what());
            }
            j.erase("command");  // the positional command decides
            wva::apply_json(cfg, j);
        }
        apply(cfg, o);
        const wva::RunReport report = wva::run(cfg);
        for (const auto& f : report.files) std::cout << f.string() << '\n';
        return kOk;
    } catch (const wva::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const wva::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const wva::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const wva::Error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumericError;
    }
}
