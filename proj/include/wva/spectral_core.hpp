#pragma once

// Complex Lorentzian amplitude lineshapes of the two exciton branches.
//
// Energies are in units of the linewidth by convention (gamma = 1, hbar = 1,
// e0 = 0), but nothing here assumes it.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "wva/errors.hpp"
#include "wva/numerics.hpp"

namespace wva {

using ComplexAmplitude = std::complex<double>;

// The physical triple (E0, dE, Gamma): branches centered at E0 -/+ dE/2 with
// FWHM Gamma of the intensity |f|^2.
struct SpectralParams {
    double e0 = 0.0;
    double delta_e = 0.0;
    double gamma = 1.0;

    void validate() const {
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw DomainError("SpectralParams: gamma must be finite and > 0");
        if (!(delta_e >= 0.0) || !std::isfinite(delta_e))
            throw DomainError("SpectralParams: delta_e must be finite and >= 0");
        if (!std::isfinite(e0)) throw DomainError("SpectralParams: e0 must be finite");
    }

    // H branch (symmetric exciton state).
    double lower_center() const { return e0 - 0.5 * delta_e; }
    // V branch (antisymmetric exciton state).
    double upper_center() const { return e0 + 0.5 * delta_e; }

    SpectralParams with_splitting(double d) const { return {e0, d, gamma}; }
};

// sqrt(gamma / 2pi) / ((E - center) + i gamma / 2)
inline ComplexAmplitude lineshape_amplitude(double energy, double center, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("lineshape_amplitude: gamma must be > 0");
    const double norm = std::sqrt(gamma / (2.0 * std::numbers::pi));
    return norm / ComplexAmplitude(energy - center, 0.5 * gamma);
}

inline double lineshape_intensity(double energy, double center, double gamma) {
    return std::norm(lineshape_amplitude(energy, center, gamma));
}

// First-order expansion of the shifted lineshape about E0 for dE << Gamma:
// f_{E0 +/- dE/2}(E) ~ f_{E0}(E) +/- sqrt(Gamma/2pi) (dE/2) / (E - E0 + i Gamma/2)^2.
inline ComplexAmplitude lineshape_firstorder(double energy, const SpectralParams& params,
                                             int branch_sign) {
    params.validate();
    if (branch_sign != 1 && branch_sign != -1)
        throw DomainError("lineshape_firstorder: branch_sign must be +1 or -1");
    const double norm = std::sqrt(params.gamma / (2.0 * std::numbers::pi));
    const ComplexAmplitude z(energy - params.e0, 0.5 * params.gamma);
    return lineshape_amplitude(energy, params.e0, params.gamma) +
           static_cast<double>(branch_sign) * norm * (0.5 * params.delta_e) / (z * z);
}

// Tan-substitution scale for integrals over the two-branch spectrum. Tracks
// the splitting so both lines stay resolved when dE is not small.
inline double spectral_scale(const SpectralParams& params) {
    return 0.5 * (params.gamma + params.delta_e);
}

enum class OverlapMethod { closed_form, quadrature };

// <f_{E0-dE/2} | f_{E0+dE/2}> = integral of conj(f_-) f_+ over E.
inline ComplexAmplitude branch_overlap_quadrature(const SpectralParams& params,
                                                  const QuadratureSpec& quad = {}) {
    params.validate();
    const double lo = params.lower_center();
    const double hi = params.upper_center();
    const double g = params.gamma;
    return integrate_transformed(
        [&](double e) {
            return std::conj(lineshape_amplitude(e, lo, g)) * lineshape_amplitude(e, hi, g);
        },
        params.e0, spectral_scale(params), quad);
}

// Closed form Gamma / (Gamma + i dE) by contour integration; the quadrature
// route stays selectable for audits.
inline ComplexAmplitude branch_overlap(const SpectralParams& params,
                                       OverlapMethod method = OverlapMethod::closed_form,
                                       const QuadratureSpec& quad = {}) {
    params.validate();
    if (method == OverlapMethod::quadrature) return branch_overlap_quadrature(params, quad);
    return params.gamma / ComplexAmplitude(params.gamma, params.delta_e);
}

// Odd-sized display grid, symmetric about its center node.
class EnergyGrid {
public:
    EnergyGrid(double center, double half_width, std::size_t n_points)
        : center_(center), half_width_(half_width) {
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            throw DomainError("EnergyGrid: half_width must be finite and > 0");
        if (n_points == 0 || n_points % 2 == 0)
            throw DomainError("EnergyGrid: n_points must be odd and positive");
        nodes_.assign(n_points, center);
        const std::size_t mid = n_points / 2;
        for (std::size_t j = 1; j <= mid; ++j) {
            const double offset = half_width * static_cast<double>(j) / static_cast<double>(mid);
            nodes_[mid - j] = center - offset;
            nodes_[mid + j] = center + offset;
        }
    }

    double center() const { return center_; }
    double half_width() const { return half_width_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    double operator[](std::size_t k) const { return nodes_[k]; }

private:
    double center_;
    double half_width_;
    std::vector<double> nodes_;
};

}  // namespace wva
