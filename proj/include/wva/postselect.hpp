#pragma once

// Polarization post-selection of the two-branch photon state, post-selected
// spectra, probe shifts and the optimal post-selection parameter.
//
// Pre-selection |i> = (|H> + |V>)/sqrt(2) entangles polarization with the two
// Lorentzian branches; projecting on
//   |f> = [(1 - delta)|H> - (1 + delta)|V>] / sqrt(2)
// leaves the (unnormalized) energy amplitude
//   A(E) = [(1 - delta) f_{E0-dE/2}(E) - (1 + delta) f_{E0+dE/2}(E)] / 2.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "wva/errors.hpp"
#include "wva/numerics.hpp"
#include "wva/spectral_core.hpp"

namespace wva {

struct PostSelection {
    double delta = 0.0;

    void validate() const {
        if (!std::isfinite(delta) || std::abs(delta) > 1.0)
            throw DomainError("PostSelection: delta must be real with |delta| <= 1");
    }
};

enum class Evaluation { quadrature, closed_form };

struct PostselectOptions {
    QuadratureSpec quad{};
    double probability_floor = 1e-14;
    Evaluation method = Evaluation::quadrature;
};

inline ComplexAmplitude postselected_amplitude(double energy, const SpectralParams& params,
                                               const PostSelection& sel) {
    const double d = sel.delta;
    const ComplexAmplitude lower =
        lineshape_amplitude(energy, params.lower_center(), params.gamma);
    const ComplexAmplitude upper =
        lineshape_amplitude(energy, params.upper_center(), params.gamma);
    return 0.5 * ((1.0 - d) * lower - (1.0 + d) * upper);
}

// P = [(1-d)^2 + (1+d)^2 - 2 (1-d^2) Re<f_-|f_+>] / 4, rearranged as
// [(1 - Re O) + d^2 (1 + Re O)] / 2 so that small P keeps its digits.
inline double postselection_probability_overlap(const SpectralParams& params,
                                                const PostSelection& sel,
                                                OverlapMethod overlap = OverlapMethod::closed_form,
                                                const QuadratureSpec& quad = {}) {
    params.validate();
    sel.validate();
    double re_overlap = 0.0;
    double one_minus = 0.0;
    if (overlap == OverlapMethod::closed_form) {
        const double g2 = params.gamma * params.gamma;
        const double d2 = params.delta_e * params.delta_e;
        re_overlap = g2 / (g2 + d2);
        one_minus = d2 / (g2 + d2);
    } else {
        re_overlap = branch_overlap_quadrature(params, quad).real();
        one_minus = 1.0 - re_overlap;
    }
    const double d = sel.delta;
    return 0.5 * (one_minus + d * d * (1.0 + re_overlap));
}

// Integral of |A(E)|^2 over the real line.
inline double postselection_probability_quadrature(const SpectralParams& params,
                                                   const PostSelection& sel,
                                                   const QuadratureSpec& quad = {}) {
    params.validate();
    sel.validate();
    return integrate_transformed(
        [&](double e) { return std::norm(postselected_amplitude(e, params, sel)); }, params.e0,
        spectral_scale(params), quad);
}

inline double postselection_probability_exact(const SpectralParams& params,
                                              const PostSelection& sel,
                                              const PostselectOptions& opts = {}) {
    if (opts.method == Evaluation::quadrature)
        return postselection_probability_quadrature(params, sel, opts.quad);
    return postselection_probability_overlap(params, sel);
}

// Small-splitting estimate delta^2 + dE^2 / (2 Gamma^2). Only meaningful for
// dE << Gamma; not enforced.
inline double postselection_probability_approx(const SpectralParams& params,
                                               const PostSelection& sel) {
    const double x = params.delta_e / params.gamma;
    return sel.delta * sel.delta + 0.5 * x * x;
}

struct Spectrum {
    EnergyGrid grid;
    std::vector<double> density;  // |A(E)|^2 / P at each grid node
    double probability;           // P, the integral of |A|^2 before normalization
};

inline void require_nondegenerate(double probability, const PostselectOptions& opts) {
    if (!(probability > opts.probability_floor))
        throw DegeneratePostselection(
            "post-selection probability is at or below the floor (delta = 0 on identical "
            "branches?)",
            probability);
}

// Normalized post-selected density at a single energy.
inline double postselected_density(double energy, const SpectralParams& params,
                                   const PostSelection& sel, double probability) {
    return std::norm(postselected_amplitude(energy, params, sel)) / probability;
}

inline Spectrum postselected_spectrum(const SpectralParams& params, const PostSelection& sel,
                                      const EnergyGrid& grid, const PostselectOptions& opts = {}) {
    const double p = postselection_probability_exact(params, sel, opts);
    require_nondegenerate(p, opts);
    std::vector<double> density;
    density.reserve(grid.size());
    for (double e : grid.nodes()) density.push_back(postselected_density(e, params, sel, p));
    return Spectrum{grid, std::move(density), p};
}

struct ShiftResult {
    double mean_shift = 0.0;                 // <E> - E0
    std::optional<double> amplification;     // mean_shift / dE, absent at dE = 0
    double probability = 0.0;
    std::optional<double> firstorder_shift;  // dE / (2 delta), absent at delta = 0
};

inline std::optional<double> firstorder_shift(const SpectralParams& params,
                                              const PostSelection& sel) {
    if (sel.delta == 0.0) return std::nullopt;
    return params.delta_e / (2.0 * sel.delta);
}

// Principal-value first moment of |A|^2 about E0 (not yet divided by P).
// Nodes are paired about E0 inside the quadrature; the cross term's 1/(E-E0)
// tail cancels only under that pairing. The closed form is delta * dE / 2: the
// two branch intensities contribute (1 -/+ delta)^2 (-/+ dE/2) / 4 and the
// symmetric principal value of the interference term vanishes.
inline double postselected_first_moment(const SpectralParams& params, const PostSelection& sel,
                                        const PostselectOptions& opts = {}) {
    if (opts.method == Evaluation::closed_form) return 0.5 * sel.delta * params.delta_e;
    return integrate_transformed(
        [&](double e) {
            return (e - params.e0) * std::norm(postselected_amplitude(e, params, sel));
        },
        params.e0, spectral_scale(params), opts.quad);
}

inline ShiftResult mean_energy_shift(const SpectralParams& params, const PostSelection& sel,
                                     const PostselectOptions& opts = {}) {
    params.validate();
    sel.validate();
    const double p = postselection_probability_exact(params, sel, opts);
    require_nondegenerate(p, opts);
    ShiftResult r;
    r.probability = p;
    r.mean_shift = postselected_first_moment(params, sel, opts) / p;
    if (params.delta_e > 0.0) r.amplification = r.mean_shift / params.delta_e;
    r.firstorder_shift = firstorder_shift(params, sel);
    return r;
}

struct OptimalDelta {
    double delta_opt = 0.0;
    double max_shift = 0.0;
    double max_amplification = 0.0;
    // Small-splitting reference values reported next to the numerical optimum.
    double analytic_delta_opt = 0.0;          // dE / (sqrt(2) Gamma)
    double analytic_max_amplification = 0.0;  // Gamma / (2 sqrt(2) dE)
    double firstorder_amplification = 0.0;    // 1 / (2 delta_opt) at the analytic optimum
    int iterations = 0;
};

inline OptimizerSpec default_delta_search() { return OptimizerSpec{0.0, 1.0, 1e-6, 200, 1}; }

// Maximizes the exact mean shift over delta in (0, 1].
inline OptimalDelta optimal_delta(const SpectralParams& params, const PostselectOptions& opts = {},
                                  const OptimizerSpec& search = default_delta_search()) {
    params.validate();
    if (!(params.delta_e > 0.0))
        throw NoOptimumError("optimal_delta: no optimum at zero splitting");
    const ScalarOptimum best = maximize_scalar(
        [&](double d) { return mean_energy_shift(params, PostSelection{d}, opts).mean_shift; },
        search);
    OptimalDelta out;
    out.delta_opt = best.argmax;
    out.max_shift = best.value;
    out.max_amplification = best.value / params.delta_e;
    const double x = params.delta_e / params.gamma;
    out.analytic_delta_opt = x / std::numbers::sqrt2;
    out.analytic_max_amplification = 1.0 / (2.0 * std::numbers::sqrt2 * x);
    out.firstorder_amplification = 1.0 / (2.0 * out.analytic_delta_opt);
    out.iterations = best.iterations;
    return out;
}

struct Fig1cRow {
    double delta = 0.0;
    bool degenerate = false;  // P at or below the floor; remaining fields unset
    std::optional<Spectrum> spectrum;
    double mean_shift = 0.0;
    std::optional<double> firstorder_shift;
    double probability = 0.0;
};

// Post-selected spectra and shifts over a list of delta values.
inline std::vector<Fig1cRow> sweep_fig1c(const SpectralParams& params,
                                         const std::vector<double>& deltas,
                                         const EnergyGrid& grid,
                                         const PostselectOptions& opts = {}) {
    std::vector<Fig1cRow> rows;
    rows.reserve(deltas.size());
    for (double d : deltas) {
        Fig1cRow row;
        row.delta = d;
        const PostSelection sel{d};
        try {
            const ShiftResult s = mean_energy_shift(params, sel, opts);
            row.spectrum = postselected_spectrum(params, sel, grid, opts);
            row.mean_shift = s.mean_shift;
            row.firstorder_shift = s.firstorder_shift;
            row.probability = s.probability;
        } catch (const DegeneratePostselection& e) {
            row.degenerate = true;
            row.probability = e.probability();
            row.firstorder_shift = firstorder_shift(params, sel);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Dense mean-shift matrix, rows indexed by splitting and columns by delta.
struct ShiftMatrix {
    std::vector<double> deltas;
    std::vector<double> delta_es;
    std::vector<double> shifts;  // row-major: shifts[i * deltas.size() + j]
    std::size_t degenerate_cells = 0;

    double at(std::size_t i_delta_e, std::size_t j_delta) const {
        return shifts[i_delta_e * deltas.size() + j_delta];
    }
};

// Degenerate cells (delta = 0 with dE = 0) are stored as 0, their symmetric
// limit, and counted.
inline ShiftMatrix sweep_fig2(const SpectralParams& base, const std::vector<double>& deltas,
                              const std::vector<double>& delta_es,
                              const PostselectOptions& opts = {}) {
    ShiftMatrix m{deltas, delta_es, {}, 0};
    m.shifts.reserve(deltas.size() * delta_es.size());
    for (double de : delta_es) {
        const SpectralParams p = base.with_splitting(de);
        for (double d : deltas) {
            try {
                m.shifts.push_back(mean_energy_shift(p, PostSelection{d}, opts).mean_shift);
            } catch (const DegeneratePostselection&) {
                m.shifts.push_back(0.0);
                ++m.degenerate_cells;
            }
        }
    }
    return m;
}

}  // namespace wva
