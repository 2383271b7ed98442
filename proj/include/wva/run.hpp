#pragma once

// Figure presets and free-form sweeps behind the wva-probe command line:
// resolved run configuration, CSV/SVG emission and run metadata.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wva/dephasing.hpp"
#include "wva/errors.hpp"
#include "wva/io.hpp"
#include "wva/noise_snr.hpp"
#include "wva/numerics.hpp"
#include "wva/postselect.hpp"
#include "wva/spectral_core.hpp"

namespace wva {

inline constexpr const char* kSoftwareVersion = "0.1.0";
// Bump whenever a value in default_config() changes.
inline constexpr const char* kDefaultsVersion = "1";

enum class Command { fig1c, fig2, fig3, fig4, shift, snr, sweep };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::fig1c: return "fig1c";
        case Command::fig2: return "fig2";
        case Command::fig3: return "fig3";
        case Command::fig4: return "fig4";
        case Command::shift: return "shift";
        case Command::snr: return "snr";
        case Command::sweep: return "sweep";
    }
    return "?";
}

inline Command parse_command(const std::string& s) {
    for (Command c : {Command::fig1c, Command::fig2, Command::fig3, Command::fig4, Command::shift,
                      Command::snr, Command::sweep})
        if (s == to_string(c)) return c;
    throw ConfigError("unknown command '" + s + "'");
}

inline const char* to_string(Mixing m) {
    return m == Mixing::paper_literal ? "paper_literal" : "probability_weighted";
}
inline Mixing parse_mixing(const std::string& s) {
    if (s == "paper_literal") return Mixing::paper_literal;
    if (s == "probability_weighted") return Mixing::probability_weighted;
    throw ConfigError("unknown mixing '" + s + "'");
}
inline SnrMethod parse_snr_method(const std::string& s) {
    if (s == "analytic") return SnrMethod::analytic;
    if (s == "monte_carlo") return SnrMethod::monte_carlo;
    throw ConfigError("unknown method '" + s + "'");
}
inline const char* to_string(DeltaMode m) { return m == DeltaMode::fixed ? "fixed" : "reoptimized"; }
inline DeltaMode parse_delta_mode(const std::string& s) {
    if (s == "fixed") return DeltaMode::fixed;
    if (s == "reoptimized") return DeltaMode::reoptimized;
    throw ConfigError("unknown delta mode '" + s + "'");
}

// Sample range "LO:HI:N[:linear|log|symlog]". symlog yields -HI..-LO, 0, LO..HI
// with log spacing on each side (2N + 1 values).
struct Range {
    enum class Spacing { linear, log, symlog };
    double lo = 0.0;
    double hi = 1.0;
    int n = 1;
    Spacing spacing = Spacing::linear;

    static Range parse(const std::string& text) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
        if (parts.size() != 3 && parts.size() != 4)
            throw ConfigError("range '" + text + "' must be LO:HI:N[:linear|log|symlog]");
        Range r;
        try {
            std::size_t pos = 0;
            r.lo = std::stod(parts[0], &pos);
            if (pos != parts[0].size()) throw std::invalid_argument("lo");
            r.hi = std::stod(parts[1], &pos);
            if (pos != parts[1].size()) throw std::invalid_argument("hi");
            r.n = std::stoi(parts[2], &pos);
            if (pos != parts[2].size()) throw std::invalid_argument("n");
        } catch (const std::exception&) {
            throw ConfigError("range '" + text + "' has a malformed number");
        }
        if (parts.size() == 4) {
            if (parts[3] == "linear") r.spacing = Spacing::linear;
            else if (parts[3] == "log") r.spacing = Spacing::log;
            else if (parts[3] == "symlog") r.spacing = Spacing::symlog;
            else throw ConfigError("range '" + text + "' has unknown spacing '" + parts[3] + "'");
        }
        r.validate();
        return r;
    }

    void validate() const {
        if (n < 1) throw ConfigError("range needs N >= 1");
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("range bounds must be finite");
        if (n > 1 && !(hi > lo)) throw ConfigError("range needs HI > LO");
        if (spacing != Spacing::linear && !(lo > 0.0))
            throw ConfigError("log and symlog ranges need LO > 0");
    }

    std::string str() const {
        std::string s = io::format_number(lo) + ":" + io::format_number(hi) + ":" + std::to_string(n);
        if (spacing == Spacing::log) s += ":log";
        if (spacing == Spacing::symlog) s += ":symlog";
        return s;
    }

    std::vector<double> values() const {
        validate();
        std::vector<double> side;
        side.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
            if (spacing == Spacing::linear) side.push_back(lo + t * (hi - lo));
            else side.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
        }
        if (n > 1) side.back() = hi;
        if (spacing != Spacing::symlog) return side;
        std::vector<double> out;
        out.reserve(2 * side.size() + 1);
        for (auto it = side.rbegin(); it != side.rend(); ++it) out.push_back(-*it);
        out.push_back(0.0);
        out.insert(out.end(), side.begin(), side.end());
        return out;
    }
};

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("malformed number list '" + text + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

inline std::string list_str(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += io::format_number(v[i]);
    }
    return s;
}

// Fully resolved run configuration. Energies in units of Gamma, times in 1/Gamma.
struct RunConfig {
    Command command = Command::fig1c;
    double e0 = 0.0;
    double delta_e = 0.1;
    double gamma = 1.0;
    std::optional<double> delta;  // unset: the optimal delta for the splitting
    Range delta_range = Range::parse("0.001:1:40:symlog");
    Range delta_e_range = Range::parse("0:0.2:21");
    Range gamma_range = Range::parse("0:0.5:26");
    Range rate_range = Range::parse("1e-6:1:61:log");
    Range ratio_range = Range::parse("0:5:26");
    Range inset_delta_range = Range::parse("0.001:1:121:log");
    std::vector<double> inset_delta_es{0.01, 0.05, 0.1};
    double gamma_noise = 0.0;
    Mixing mixing = Mixing::paper_literal;
    double cutoff = 0.0;
    double sigma = 1.0;
    double tau_c = 1e3;
    double t1 = 1.0;
    double pump_rate = 1.0;
    double total_time = 1e6;
    int trials = 500;
    std::uint64_t seed = 1;
    SnrMethod method = SnrMethod::analytic;
    DeltaMode delta_mode = DeltaMode::fixed;
    int grid_points = 401;
    double grid_half_width = 3.0;
    int quad_order = 16;
    int quad_panels = 64;
    std::string out = ".";
    bool svg = false;

    SpectralParams params() const { return {e0, delta_e, gamma}; }

    PostselectOptions postselect_options() const {
        PostselectOptions o;
        o.quad.order = quad_order;
        o.quad.panels = quad_panels;
        return o;
    }

    DephasingModel dephasing() const {
        DephasingModel m;
        m.gamma_noise = gamma_noise;
        m.mixing = mixing;
        m.cutoff = cutoff;
        return m;
    }

    SlowNoiseConfig noise() const {
        SlowNoiseConfig c;
        c.sigma = sigma;
        c.tau_c = tau_c;
        c.t1 = t1;
        c.pump_rate = pump_rate;
        c.total_time = total_time;
        c.trials = trials;
        c.seed = seed;
        return c;
    }
};

// Per-command presets. Parameter values not fixed by the figures themselves
// are preset choices and are labeled as such in the metadata.
inline RunConfig default_config(Command command) {
    RunConfig c;
    c.command = command;
    switch (command) {
        case Command::fig2:
        case Command::fig4:
        case Command::sweep:
            c.delta_range = Range::parse("0.001:1:121:log");
            break;
        default:
            break;
    }
    return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = to_string(c.command);
    j["e0"] = c.e0;
    j["delta_e"] = c.delta_e;
    j["gamma"] = c.gamma;
    j["delta"] = c.delta ? nlohmann::json(*c.delta) : nlohmann::json(nullptr);
    j["delta_range"] = c.delta_range.str();
    j["delta_e_range"] = c.delta_e_range.str();
    j["gamma_range"] = c.gamma_range.str();
    j["rate_range"] = c.rate_range.str();
    j["ratio_range"] = c.ratio_range.str();
    j["inset_delta_range"] = c.inset_delta_range.str();
    j["inset_delta_es"] = list_str(c.inset_delta_es);
    j["gamma_noise"] = c.gamma_noise;
    j["mixing"] = to_string(c.mixing);
    j["cutoff"] = c.cutoff;
    j["sigma"] = c.sigma;
    j["tau_c"] = c.tau_c;
    j["t1"] = c.t1;
    j["pump_rate"] = c.pump_rate;
    j["total_time"] = c.total_time;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["method"] = to_string(c.method);
    j["delta_mode"] = to_string(c.delta_mode);
    j["grid_points"] = c.grid_points;
    j["grid_half_width"] = c.grid_half_width;
    j["quad_order"] = c.quad_order;
    j["quad_panels"] = c.quad_panels;
    j["out"] = c.out;
    j["svg"] = c.svg;
    return j;
}

// Overlays the recognized keys of a flat JSON object; other keys (metadata
// such as software_version or diagnostics) are ignored so meta.json replays.
inline void apply_json(RunConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a flat JSON object");
    try {
        auto num = [&](const char* key, double& dst) {
            if (j.contains(key)) dst = j.at(key).get<double>();
        };
        auto range = [&](const char* key, Range& dst) {
            if (j.contains(key)) dst = Range::parse(j.at(key).get<std::string>());
        };
        if (j.contains("command")) c.command = parse_command(j.at("command").get<std::string>());
        num("e0", c.e0);
        num("delta_e", c.delta_e);
        num("gamma", c.gamma);
        if (j.contains("delta")) {
            if (j.at("delta").is_null()) c.delta.reset();
            else c.delta = j.at("delta").get<double>();
        }
        range("delta_range", c.delta_range);
        range("delta_e_range", c.delta_e_range);
        range("gamma_range", c.gamma_range);
        range("rate_range", c.rate_range);
        range("ratio_range", c.ratio_range);
        range("inset_delta_range", c.inset_delta_range);
        if (j.contains("inset_delta_es"))
            c.inset_delta_es = parse_list(j.at("inset_delta_es").get<std::string>());
        num("gamma_noise", c.gamma_noise);
        if (j.contains("mixing")) c.mixing = parse_mixing(j.at("mixing").get<std::string>());
        num("cutoff", c.cutoff);
        num("sigma", c.sigma);
        num("tau_c", c.tau_c);
        num("t1", c.t1);
        num("pump_rate", c.pump_rate);
        num("total_time", c.total_time);
        if (j.contains("trials")) c.trials = j.at("trials").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("method")) c.method = parse_snr_method(j.at("method").get<std::string>());
        if (j.contains("delta_mode"))
            c.delta_mode = parse_delta_mode(j.at("delta_mode").get<std::string>());
        if (j.contains("grid_points")) c.grid_points = j.at("grid_points").get<int>();
        num("grid_half_width", c.grid_half_width);
        if (j.contains("quad_order")) c.quad_order = j.at("quad_order").get<int>();
        if (j.contains("quad_panels")) c.quad_panels = j.at("quad_panels").get<int>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        if (j.contains("svg")) c.svg = j.at("svg").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
}

inline void validate(const RunConfig& c) {
    try {
        c.params().validate();
        if (c.delta) PostSelection{*c.delta}.validate();
        c.dephasing().validate(c.params());
        if (c.grid_points < 1 || c.grid_points % 2 == 0)
            throw ConfigError("grid_points must be odd and positive");
        if (!(c.grid_half_width > 0.0)) throw ConfigError("grid_half_width must be > 0");
        c.postselect_options().quad.validate();
        if (c.command == Command::fig3 || c.command == Command::snr) {
            c.noise().validate();
            for (double r : c.rate_range.values())
                if (c.command == Command::fig3) c.noise().check_rate(r);
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

// Outcome of one run: files written and flat diagnostics for meta.json.
struct RunReport {
    std::vector<std::filesystem::path> files;
    nlohmann::json diagnostics = nlohmann::json::object();
};

namespace detail {

inline double opt_or_nan(const std::optional<double>& v) {
    return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

inline void emit(RunReport& report, const std::filesystem::path& path, const std::string& text) {
    io::write_text(path, text);
    report.files.push_back(path);
}

// delta for single-point commands: explicit, else the optimum of the exact shift.
inline double resolve_delta(const RunConfig& c) {
    if (c.delta) return *c.delta;
    if (!(c.delta_e > 0.0))
        throw ConfigError("--delta is required when delta_e = 0 (no optimal delta exists)");
    return optimal_delta(c.params(), c.postselect_options()).delta_opt;
}

inline void run_fig1c(const RunConfig& c, const std::filesystem::path& dir, RunReport& report) {
    const SpectralParams params = c.params();
    const PostselectOptions opts = c.postselect_options();
    const EnergyGrid grid(params.e0, c.grid_half_width, static_cast<std::size_t>(c.grid_points));
    const std::vector<double> deltas = c.delta_range.values();
    const auto rows = sweep_fig1c(params, deltas, grid, opts);

    io::CsvTable spectra({"delta", "energy", "density"});
    io::CsvTable shifts({"delta", "exact_shift", "firstorder_shift", "probability", "degenerate"});
    double max_norm_error = 0.0;
    double max_refine_change = 0.0;
    std::size_t degenerate = 0;
    PostselectOptions fine = opts;
    fine.quad = opts.quad.refined();
    for (const auto& row : rows) {
        shifts.add_row({row.delta, row.degenerate ? NAN : row.mean_shift,
                        opt_or_nan(row.firstorder_shift), row.probability,
                        static_cast<long long>(row.degenerate)});
        if (row.degenerate) {
            ++degenerate;
            continue;
        }
        for (std::size_t k = 0; k < grid.size(); ++k)
            spectra.add_row({row.delta, grid[k], row.spectrum->density[k]});
        const PostSelection sel{row.delta};
        const double norm = integrate_transformed(
            [&](double e) { return postselected_density(e, params, sel, row.probability); },
            params.e0, spectral_scale(params), opts.quad);
        max_norm_error = std::max(max_norm_error, std::abs(norm - 1.0));
        const double refined = mean_energy_shift(params, sel, fine).mean_shift;
        max_refine_change = std::max(max_refine_change, std::abs(refined - row.mean_shift));
    }
    emit(report, dir / "fig1c_spectra.csv", spectra.str());
    emit(report, dir / "fig1c_shifts.csv", shifts.str());
    report.diagnostics["diag_fig1c_max_normalization_error"] = max_norm_error;
    report.diagnostics["diag_fig1c_max_refinement_change"] = max_refine_change;
    report.diagnostics["diag_fig1c_degenerate_rows"] = degenerate;

    if (c.svg) {
        io::Heatmap h;
        h.title = "post-selected spectra, dE = " + io::format_number(c.delta_e);
        h.x_label = "E - E0";
        h.y_label = "delta";
        h.x = grid.nodes();
        for (auto& e : h.x) e -= params.e0;
        io::Polyline exact{{}, "white", "6,4", "exact mean shift"};
        io::Polyline first{{}, "white", "1,3", "first-order shift"};
        for (const auto& row : rows) {
            h.y.push_back(row.delta);
            for (std::size_t k = 0; k < grid.size(); ++k)
                h.z.push_back(row.degenerate ? NAN : row.spectrum->density[k]);
            if (!row.degenerate) exact.points.emplace_back(row.mean_shift, row.delta);
            if (row.firstorder_shift && std::abs(*row.firstorder_shift) <= c.grid_half_width)
                first.points.emplace_back(*row.firstorder_shift, row.delta);
        }
        h.overlays = {exact, first,
                      {{{-0.5 * c.delta_e, deltas.front()}, {-0.5 * c.delta_e, deltas.back()}},
                       "white", "8,3,2,3", "E0 - dE/2"},
                      {{{0.5 * c.delta_e, deltas.front()}, {0.5 * c.delta_e, deltas.back()}},
                       "white", "8,3,2,3", "E0 + dE/2"}};
        emit(report, dir / "fig1c.svg", io::render_heatmap(h));
    }
}

inline void run_fig2(const RunConfig& c, const std::filesystem::path& dir, RunReport& report) {
    const std::vector<double> deltas = c.delta_range.values();
    const std::vector<double> des = c.delta_e_range.values();
    const ShiftMatrix m = sweep_fig2(c.params(), deltas, des, c.postselect_options());
    io::CsvTable table({"delta", "delta_e", "exact_shift", "amplification"});
    for (std::size_t i = 0; i < des.size(); ++i)
        for (std::size_t j = 0; j < deltas.size(); ++j)
            table.add_row({deltas[j], des[i], m.at(i, j), des[i] > 0.0 ? m.at(i, j) / des[i] : NAN});
    emit(report, dir / "fig2_matrix.csv", table.str());
    report.diagnostics["diag_fig2_degenerate_cells"] = m.degenerate_cells;
    if (c.svg) {
        io::Heatmap h{"probe shift", "delta", "dE", deltas, des, m.shifts, {}};
        io::Polyline opt{{}, "white", "4,3", "dE / (sqrt(2) Gamma)"};
        for (double de : des)
            if (de > 0.0) opt.points.emplace_back(de / (std::numbers::sqrt2 * c.gamma), de);
        h.overlays.push_back(opt);
        emit(report, dir / "fig2.svg", io::render_heatmap(h));
    }
}

inline void run_fig3(const RunConfig& c, const std::filesystem::path& dir, RunReport& report) {
    const SpectralParams params = c.params();
    const PostselectOptions opts = c.postselect_options();
    const double delta = resolve_delta(c);
    SlowNoiseConfig noise = c.noise();
    const std::vector<double> rates = c.rate_range.values();

    io::CsvTable table({"rate", "snr_no_noise", "snr_conventional", "snr_wva", "method"});
    std::vector<Fig3Row> rows;
    std::size_t failed = 0;
    for (double rate : rates) {
        try {
            const auto r = sweep_fig3(params, PostSelection{delta}, noise, {rate}, c.method,
                                      c.delta_mode, opts);
            rows.push_back(r.front());
        } catch (const EmptyTrialError&) {
            Fig3Row r;
            r.rate = rate;
            r.method = c.method;
            noise.pump_rate = rate;
            r.snr_no_noise = snr_no_noise(params.delta_e, noise, rate).snr;
            r.snr_conventional = NAN;
            r.snr_wva = NAN;
            rows.push_back(r);
            ++failed;
        }
    }
    for (const auto& r : rows)
        table.add_row({r.rate, r.snr_no_noise, r.snr_conventional, r.snr_wva,
                       std::string(to_string(r.method))});
    emit(report, dir / "fig3_snr.csv", table.str());

    // Inset: SNR against delta at the reload ceiling.
    noise.pump_rate = noise.max_rate();
    io::CsvTable inset({"delta", "snr"});
    std::vector<std::pair<double, double>> inset_points;
    for (double d : c.inset_delta_range.values()) {
        const double s = snr_wva(params, PostSelection{d}, noise, SnrMethod::analytic, opts).snr;
        inset.add_row({d, s});
        inset_points.emplace_back(d, s);
    }
    emit(report, dir / "fig3_inset.csv", inset.str());
    report.diagnostics["diag_fig3_delta"] = delta;
    report.diagnostics["diag_fig3_empty_trial_rows"] = failed;
    report.diagnostics["diag_fig3_preset_note"] =
        "sigma, tau_c, total_time and delta are preset choices, not published values";

    if (c.svg) {
        io::LinePlot p;
        p.title = "SNR vs pump rate (tau_c = " + io::format_number(c.tau_c) + ")";
        p.x_label = "rate";
        p.y_label = "SNR";
        io::Polyline a{{}, "green", "6,4", "no slow noise"};
        io::Polyline b{{}, "blue", "", "conventional"};
        io::Polyline w{{}, "red", "8,3,2,3", "post-selected"};
        for (const auto& r : rows) {
            a.points.emplace_back(r.rate, r.snr_no_noise);
            b.points.emplace_back(r.rate, r.snr_conventional);
            w.points.emplace_back(r.rate, r.snr_wva);
        }
        p.series = {a, b, w};
        emit(report, dir / "fig3.svg", io::render_lineplot(p));
    }
}

inline void run_fig4(const RunConfig& c, const std::filesystem::path& dir, RunReport& report) {
    const SpectralParams params = c.params();
    const PostselectOptions opts = c.postselect_options();
    if (!(params.delta_e > 0.0)) throw ConfigError("fig4 needs delta_e > 0");
    const std::vector<double> gammas = c.gamma_range.values();
    const std::vector<double> deltas = c.delta_range.values();
    DephasingModel model = c.dephasing();

    io::CsvTable map({"gamma", "delta", "shift", "amplification"});
    std::vector<double> z;
    double max_residual = 0.0;
    for (double g : gammas) {
        model.gamma_noise = g;
        for (double d : deltas) {
            const DephasedShift s = dephased_shift(params, PostSelection{d}, model, opts);
            max_residual = std::max(max_residual, s.tail_residual);
            map.add_row({g, d, s.shift.mean_shift, opt_or_nan(s.shift.amplification)});
            z.push_back(s.shift.mean_shift);
        }
    }
    emit(report, dir / "fig4_map.csv", map.str());

    const auto curve = optimal_shift_vs_gamma(params, gammas, model, opts);
    io::CsvTable opt({"gamma", "delta_opt", "max_shift"});
    for (const auto& r : curve) opt.add_row({r.gamma_noise, r.delta_opt, r.max_shift});
    emit(report, dir / "fig4_optcurve.csv", opt.str());

    const auto curves =
        optimal_amp_vs_ratio(params, c.inset_delta_es, c.ratio_range.values(), model, opts);
    io::CsvTable inset({"delta_e", "ratio", "amplification_opt"});
    for (const auto& cv : curves)
        for (const auto& pt : cv.points) inset.add_row({cv.delta_e, pt.ratio, pt.amplification_opt});
    emit(report, dir / "fig4_inset.csv", inset.str());
    report.diagnostics["diag_fig4_max_tail_residual"] = max_residual;

    if (c.svg) {
        io::Heatmap h{"probe shift vs dephasing, dE = " + io::format_number(c.delta_e), "delta",
                      "gamma_noise", deltas, gammas, z, {}};
        io::Polyline line{{}, "white", "1,3", "optimal delta"};
        for (const auto& r : curve) line.points.emplace_back(r.delta_opt, r.gamma_noise);
        h.overlays.push_back(line);
        emit(report, dir / "fig4.svg", io::render_heatmap(h));
    }
}

inline void run_shift(const RunConfig& c, const std::filesystem::path& dir, RunReport& report) {
    const double delta = resolve_delta(c);
    const DephasedShift s =
        dephased_shift(c.params(), PostSelection{delta}, c.dephasing(), c.postselect_options());
    io::CsvTable t({"delta", "delta_e", "gamma_noise", "exact_shift", "firstorder_shift",
                    "amplification", "probability"});
    t.add_row({delta, c.delta_e, c.gamma_noise, s.shift.mean_shift,
               opt_or_nan(s.shift.firstorder_shift), opt_or_nan(s.shift.amplification),
               s.shift.probability});
    emit(report, dir / "shift.csv", t.str());
    report.diagnostics["diag_shift_tail_residual"] = s.tail_residual;
}

inline void run_snr(const RunConfig& c, const std::filesystem::path& dir, RunReport& report) {
    const SpectralParams params = c.params();
    const double delta = resolve_delta(c);
    const SlowNoiseConfig noise = c.noise();
    const SnrResult conv = snr_conventional(params, noise, noise.pump_rate, c.method);
    const SnrResult wva = snr_wva(params, PostSelection{delta}, noise, c.method, c.postselect_options());
    const SnrResult none = snr_no_noise(params.delta_e, noise, noise.pump_rate);
    io::CsvTable t({"rate", "delta", "snr_no_noise", "snr_conventional", "snr_wva", "method",
                    "std_error_conventional", "std_error_wva"});
    t.add_row({noise.pump_rate, delta, none.snr, conv.snr, wva.snr, std::string(to_string(c.method)),
               opt_or_nan(conv.std_error), opt_or_nan(wva.std_error)});
    emit(report, dir / "snr.csv", t.str());
    report.diagnostics["diag_snr_wva_effective_rate"] = wva.effective_rate;
}

inline void run_sweep(const RunConfig& c, const std::filesystem::path& dir, RunReport& report) {
    const std::vector<double> deltas = c.delta_range.values();
    const std::vector<double> des = c.delta_e_range.values();
    const DephasingModel model = c.dephasing();
    const PostselectOptions opts = c.postselect_options();
    io::CsvTable t({"delta", "delta_e", "gamma_noise", "shift", "amplification", "probability"});
    std::size_t degenerate = 0;
    for (double de : des) {
        const SpectralParams p = c.params().with_splitting(de);
        for (double d : deltas) {
            try {
                const DephasedShift s = dephased_shift(p, PostSelection{d}, model, opts);
                t.add_row({d, de, c.gamma_noise, s.shift.mean_shift,
                           opt_or_nan(s.shift.amplification), s.shift.probability});
            } catch (const DegeneratePostselection& e) {
                t.add_row({d, de, c.gamma_noise, NAN, NAN, e.probability()});
                ++degenerate;
            }
        }
    }
    emit(report, dir / "sweep.csv", t.str());
    report.diagnostics["diag_sweep_degenerate_cells"] = degenerate;
}

}  // namespace detail

// Executes one command and writes its tables plus meta.json into c.out.
inline RunReport run(const RunConfig& c) {
    validate(c);
    const auto start = std::chrono::steady_clock::now();
    const std::filesystem::path dir(c.out);
    io::ensure_directory(dir);
    RunReport report;
    switch (c.command) {
        case Command::fig1c: detail::run_fig1c(c, dir, report); break;
        case Command::fig2: detail::run_fig2(c, dir, report); break;
        case Command::fig3: detail::run_fig3(c, dir, report); break;
        case Command::fig4: detail::run_fig4(c, dir, report); break;
        case Command::shift: detail::run_shift(c, dir, report); break;
        case Command::snr: detail::run_snr(c, dir, report); break;
        case Command::sweep: detail::run_sweep(c, dir, report); break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    nlohmann::json meta = to_json(c);
    meta["software_version"] = kSoftwareVersion;
    meta["defaults_version"] = kDefaultsVersion;
    meta["rng_algorithm"] = rng_algorithm();
    meta["wall_clock_seconds"] = elapsed;
    std::string files;
    for (const auto& f : report.files) {
        if (!files.empty()) files += ',';
        files += f.filename().string();
    }
    meta["files"] = files;
    for (const auto& [k, v] : report.diagnostics.items()) meta[k] = v;
    const auto meta_path = dir / "meta.json";
    io::write_text(meta_path, meta.dump(2) + "\n");
    report.files.push_back(meta_path);
    return report;
}

}  // namespace wva
