#pragma once

// Probe dephasing as a Lorentzian-distributed random shift eps of the
// splitting, mixed into the post-selected state:
//   rho = integral d eps P_noise(eps) |Psi_p>_{dE+eps} <Psi_p|_{dE+eps}.
// Only the splitting is perturbed; E0 never moves.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "wva/errors.hpp"
#include "wva/numerics.hpp"
#include "wva/postselect.hpp"
#include "wva/spectral_core.hpp"

namespace wva {

enum class Mixing {
    paper_literal,         // normalized post-selected states weighted by P_noise only
    probability_weighted,  // additionally weighted by the success probability P(dE+eps)
};

struct DephasingModel {
    double gamma_noise = 0.0;  // FWHM of the Lorentzian noise distribution
    Mixing mixing = Mixing::paper_literal;
    double cutoff = 0.0;       // half-width of the eps domain; 0 selects 50 max(gamma_noise, Gamma)
    QuadratureSpec quad{16, 256, Transform::tan_substitution, 1e-10};
    double tail_tolerance = 1e-2;            // bound on the tail residual, in energy units
    Evaluation inner = Evaluation::closed_form;  // evaluation of the per-eps shift

    double resolved_cutoff(const SpectralParams& params) const {
        return cutoff > 0.0 ? cutoff : 50.0 * std::max(gamma_noise, params.gamma);
    }

    void validate(const SpectralParams& params) const {
        if (!(gamma_noise >= 0.0) || !std::isfinite(gamma_noise))
            throw DomainError("DephasingModel: gamma_noise must be finite and >= 0");
        if (!(tail_tolerance > 0.0))
            throw DomainError("DephasingModel: tail_tolerance must be > 0");
        const double c = resolved_cutoff(params);
        if (!(c >= 10.0 * std::max(gamma_noise, params.gamma)))
            throw DomainError("DephasingModel: cutoff must be >= 10 max(gamma_noise, Gamma)");
        quad.validate();
    }
};

// Lorentzian density of FWHM gamma_noise centered at zero.
inline double noise_pdf(double eps, const DephasingModel& model) {
    const double g = model.gamma_noise;
    if (!(g > 0.0))
        throw DomainError("noise_pdf: gamma_noise must be > 0 (use the pure path at 0)");
    return (g / (2.0 * std::numbers::pi)) / (eps * eps + 0.25 * g * g);
}

struct DephasedShift {
    ShiftResult shift;           // mean_shift, amplification, mixed success probability
    double tail_residual = 0.0;  // estimated effect of the truncated |eps| > cutoff tails
    double retained_mass = 1.0;  // noise probability inside the cutoff
    double cutoff = 0.0;
};

namespace detail {

// Post-selection on a signed splitting D. Negative D swaps the two branches,
// which is the same as flipping delta: P(-D, d) = P(D, -d), shift(-D, d) = shift(D, -d).
struct SignedBranch {
    double probability;
    double moment;  // P * shift
};

inline SignedBranch signed_branch(const SpectralParams& params, double splitting, double delta,
                                  const PostselectOptions& opts) {
    const SpectralParams p = params.with_splitting(std::abs(splitting));
    const PostSelection sel{splitting < 0.0 ? -delta : delta};
    return {postselection_probability_exact(p, sel, opts),
            postselected_first_moment(p, sel, opts)};
}

}  // namespace detail

inline DephasedShift dephased_shift(const SpectralParams& params, const PostSelection& sel,
                                    const DephasingModel& model,
                                    const PostselectOptions& opts = {}) {
    params.validate();
    sel.validate();
    model.validate(params);

    DephasedShift out;
    if (model.gamma_noise == 0.0) {
        out.shift = mean_energy_shift(params, sel, opts);
        return out;
    }

    PostselectOptions inner = opts;
    inner.method = model.inner;
    const double cutoff = model.resolved_cutoff(params);
    const double scale = 0.5 * std::max(model.gamma_noise, params.gamma);
    const double mass = (2.0 / std::numbers::pi) * std::atan(2.0 * cutoff / model.gamma_noise);

    // Per-eps contribution and weight under the chosen mixing.
    auto term = [&](double eps) -> std::complex<double> {
        const auto b = detail::signed_branch(params, params.delta_e + eps, sel.delta, inner);
        const double w = noise_pdf(eps, model);
        if (model.mixing == Mixing::probability_weighted)
            return {w * b.moment, w * b.probability};
        if (!(b.probability > opts.probability_floor)) return {0.0, 0.0};
        return {w * b.moment / b.probability, w * b.probability};
    };
    // Real part carries the shift numerator, imaginary part the P-weighted mass.
    const std::complex<double> acc =
        integrate_transformed(term, 0.0, scale, model.quad, cutoff);

    // Omitted tails: the paired integrand decays as 1/eps^2 beyond the cutoff,
    // so its integral there is about q(L) L. That estimate is added back; the
    // residual compares it with plain renormalization by the retained mass,
    // which assumes the tails carry the mean.
    const std::complex<double> tail = (term(cutoff) + term(-cutoff)) * cutoff;
    const double mean_probability = acc.imag() + tail.imag();
    double mean = 0.0;
    double renormalized = 0.0;
    if (model.mixing == Mixing::probability_weighted) {
        require_nondegenerate(mean_probability, opts);
        mean = (acc.real() + tail.real()) / mean_probability;
        renormalized = acc.real() / acc.imag();
    } else {
        mean = acc.real() + tail.real();
        renormalized = acc.real() / mass;
    }
    const double residual = std::abs(mean - renormalized);
    if (!(residual <= model.tail_tolerance)) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "dephased_shift: tail residual " << residual << " exceeds tolerance "
            << model.tail_tolerance << " (gamma_noise = " << model.gamma_noise
            << ", cutoff = " << cutoff << ", delta = " << sel.delta << ")";
        throw NumericError(msg.str());
    }

    out.shift.mean_shift = mean;
    out.shift.probability = mean_probability;
    if (params.delta_e > 0.0) out.shift.amplification = mean / params.delta_e;
    out.shift.firstorder_shift = firstorder_shift(params, sel);
    out.tail_residual = residual;
    out.retained_mass = mass;
    out.cutoff = cutoff;
    return out;
}

struct GammaOptimum {
    double gamma_noise = 0.0;
    double delta_opt = 0.0;
    double max_shift = 0.0;
    double max_amplification = 0.0;
};

inline GammaOptimum optimal_dephased_delta(const SpectralParams& params,
                                           const DephasingModel& model,
                                           const PostselectOptions& opts = {},
                                           const OptimizerSpec& search = default_delta_search()) {
    params.validate();
    if (!(params.delta_e > 0.0))
        throw NoOptimumError("optimal_dephased_delta: no optimum at zero splitting");
    GammaOptimum row;
    row.gamma_noise = model.gamma_noise;
    if (model.gamma_noise == 0.0) {
        const OptimalDelta pure = optimal_delta(params, opts, search);
        row.delta_opt = pure.delta_opt;
        row.max_shift = pure.max_shift;
    } else {
        const ScalarOptimum best = maximize_scalar(
            [&](double d) {
                return dephased_shift(params, PostSelection{d}, model, opts).shift.mean_shift;
            },
            search);
        row.delta_opt = best.argmax;
        row.max_shift = best.value;
    }
    row.max_amplification = row.max_shift / params.delta_e;
    return row;
}

// Optimal delta and shift for each dephasing width.
inline std::vector<GammaOptimum> optimal_shift_vs_gamma(
    const SpectralParams& params, const std::vector<double>& gammas, DephasingModel model,
    const PostselectOptions& opts = {}, const OptimizerSpec& search = default_delta_search()) {
    std::vector<GammaOptimum> rows;
    rows.reserve(gammas.size());
    for (double g : gammas) {
        model.gamma_noise = g;
        rows.push_back(optimal_dephased_delta(params, model, opts, search));
    }
    return rows;
}

struct AmplificationPoint {
    double ratio = 0.0;  // gamma_noise / dE
    double delta_opt = 0.0;
    double amplification_opt = 0.0;
};

struct AmplificationCurve {
    double delta_e = 0.0;
    std::vector<AmplificationPoint> points;
};

// Optimal amplification against gamma_noise / dE, one curve per splitting.
inline std::vector<AmplificationCurve> optimal_amp_vs_ratio(
    const SpectralParams& base, const std::vector<double>& delta_es,
    const std::vector<double>& ratios, DephasingModel model, const PostselectOptions& opts = {},
    const OptimizerSpec& search = default_delta_search()) {
    std::vector<AmplificationCurve> curves;
    curves.reserve(delta_es.size());
    for (double de : delta_es) {
        if (!(de > 0.0)) throw DomainError("optimal_amp_vs_ratio: every dE must be > 0");
        const SpectralParams p = base.with_splitting(de);
        AmplificationCurve curve{de, {}};
        for (double r : ratios) {
            model.gamma_noise = r * de;
            const GammaOptimum g = optimal_dephased_delta(p, model, opts, search);
            curve.points.push_back({r, g.delta_opt, g.max_amplification});
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

}  // namespace wva
