#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "wva/spectral_core.hpp"

using namespace wva;
using cd = std::complex<double>;

namespace {

// Plain Simpson rule in theta with E = c + s tan(theta), no node pairing.
cd overlap_simpson(double de, double gamma, int n = 200000) {
    const double s = 0.5 * (gamma + de);
    const double a = -std::numbers::pi / 2, b = std::numbers::pi / 2;
    const double h = (b - a) / n;
    cd sum = 0.0;
    for (int i = 1; i < n; ++i) {
        const double t = a + i * h;
        const double e = s * std::tan(t);
        const double jac = s / (std::cos(t) * std::cos(t));
        const cd v = std::conj(lineshape_amplitude(e, -0.5 * de, gamma)) *
                     lineshape_amplitude(e, 0.5 * de, gamma) * jac;
        sum += v * ((i % 2) ? 4.0 : 2.0);
    }
    // both endpoints tend to gamma / (2 pi s)
    const double end = gamma / (2.0 * std::numbers::pi) / s;
    sum += 2.0 * end;
    return sum * h / 3.0;
}

}  // namespace

TEST(Lineshape, OnResonanceValue) {
    const cd f = lineshape_amplitude(0.0, 0.0, 1.0);
    EXPECT_NEAR(f.real(), 0.0, 1e-15);
    EXPECT_NEAR(f.imag(), -0.7978845608028654, 1e-12);
}

TEST(Lineshape, HalfMaximumAtHalfWidth) {
    for (double g : {0.2, 1.0, 4.0}) {
        const double peak = lineshape_intensity(1.5, 1.5, g);
        EXPECT_NEAR(lineshape_intensity(1.5 + 0.5 * g, 1.5, g), 0.5 * peak, 1e-13 * peak);
        EXPECT_NEAR(lineshape_intensity(1.5 - 0.5 * g, 1.5, g), 0.5 * peak, 1e-13 * peak);
    }
}

TEST(Lineshape, NormalizedOverLinewidths) {
    const QuadratureSpec q;
    for (double g = 0.1; g <= 10.0; g *= 1.25) {
        const SpectralParams p{0.3, 0.0, g};
        const double v = integrate_transformed([&](double e) { return lineshape_intensity(e, 0.3, g); },
                                               0.3, spectral_scale(p), q);
        EXPECT_NEAR(v, 1.0, 1e-8) << g;
    }
}

TEST(Lineshape, IntensitySymmetric) {
    const EnergyGrid grid(0.0, 3.0, 301);
    for (std::size_t k = 0; k < grid.size(); ++k)
        EXPECT_EQ(lineshape_intensity(grid[k], 0.0, 1.0),
                  lineshape_intensity(grid[grid.size() - 1 - k], 0.0, 1.0));
}

TEST(Lineshape, RejectsNonPositiveGamma) {
    EXPECT_THROW(lineshape_amplitude(0.0, 0.0, 0.0), DomainError);
    EXPECT_THROW(lineshape_amplitude(0.0, 0.0, -1.0), DomainError);
    EXPECT_THROW((SpectralParams{0.0, -0.1, 1.0}).validate(), DomainError);
}

TEST(FirstOrder, ZeroSplittingIsExact) {
    const SpectralParams p{0.0, 0.0, 1.0};
    for (double e : {-2.0, 0.0, 0.4}) {
        EXPECT_EQ(lineshape_firstorder(e, p, +1), lineshape_amplitude(e, 0.0, 1.0));
        EXPECT_EQ(lineshape_firstorder(e, p, -1), lineshape_amplitude(e, 0.0, 1.0));
    }
}

TEST(FirstOrder, OnResonanceCorrection) {
    const SpectralParams p{0.0, 0.2, 1.0};
    // 1/(i/2)^2 = -4, times dE/2 = 0.1: correction -0.4 sqrt(1/2pi)
    const cd got = lineshape_firstorder(0.0, p, +1);
    const cd want = lineshape_amplitude(0.0, 0.0, 1.0) - 0.4 * std::sqrt(1.0 / (2.0 * std::numbers::pi));
    EXPECT_NEAR(std::abs(got - want), 0.0, 1e-15);
}

TEST(FirstOrder, ErrorBoundedAndQuadratic) {
    const SpectralParams p{0.0, 0.01, 1.0};
    for (double e = -5.0; e <= 5.0; e += 0.05) {
        for (int s : {-1, 1}) {
            const cd exact = lineshape_amplitude(e, s > 0 ? p.upper_center() : p.lower_center(), 1.0);
            const double err = std::abs(lineshape_firstorder(e, p, s) - exact);
            EXPECT_LE(err, 2.0 * 0.01 * 0.01 * std::abs(exact)) << e;
        }
    }
    auto max_err = [](double de) {
        const SpectralParams q{0.0, de, 1.0};
        double m = 0.0;
        for (double e = -5.0; e <= 5.0; e += 0.01)
            m = std::max(m, std::abs(lineshape_firstorder(e, q, 1) - lineshape_amplitude(e, q.upper_center(), 1.0)));
        return m;
    };
    const double ratio = max_err(0.02) / max_err(0.01);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(Overlap, ClosedFormValues) {
    EXPECT_EQ(branch_overlap({0.0, 0.0, 1.0}), cd(1.0, 0.0));
    const cd o1 = branch_overlap({0.0, 1.0, 1.0});
    EXPECT_NEAR(o1.real(), 0.5, 1e-15);
    EXPECT_NEAR(o1.imag(), -0.5, 1e-15);
    EXPECT_NEAR(std::norm(branch_overlap({0.0, 3.0, 1.0})), 0.1, 1e-15);
}

TEST(Overlap, MagnitudeDecreasesWithSplitting) {
    double prev = 2.0;
    for (double de = 0.0; de <= 5.0; de += 0.05) {
        const double m = std::abs(branch_overlap({0.0, de, 1.0}));
        EXPECT_LT(m, prev);
        prev = m;
    }
}

TEST(Overlap, QuadratureMatchesClosedForm) {
    for (double g : {0.5, 1.0, 2.0})
        for (double de : {0.0, 0.01, 0.1, 1.0, 3.0, 10.0}) {
            const SpectralParams p{0.25, de, g};
            const cd a = branch_overlap(p, OverlapMethod::closed_form);
            const cd b = branch_overlap(p, OverlapMethod::quadrature);
            EXPECT_LT(std::abs(a - b), 1e-8) << g << " " << de;
        }
}

TEST(Overlap, IndependentSimpsonOracle) {
    for (double de : {0.1, 1.0, 3.0}) {
        const cd ref = overlap_simpson(de, 1.0);
        const cd got = branch_overlap({0.0, de, 1.0}, OverlapMethod::quadrature);
        EXPECT_LT(std::abs(ref - got), 1e-7) << de;
    }
}

TEST(EnergyGridTest, SymmetricAboutCenter) {
    const EnergyGrid g(1.25, 3.0, 401);
    ASSERT_EQ(g.size(), 401u);
    EXPECT_EQ(g[200], 1.25);
    EXPECT_NEAR(g[0], -1.75, 1e-15);
    EXPECT_NEAR(g[400], 4.25, 1e-15);
    for (std::size_t k = 0; k < g.size(); ++k)
        EXPECT_NEAR(g[k] - 1.25, -(g[g.size() - 1 - k] - 1.25), 1e-15);
}

TEST(EnergyGridTest, RejectsBadSizes) {
    EXPECT_THROW(EnergyGrid(0.0, 1.0, 0), DomainError);
    EXPECT_THROW(EnergyGrid(0.0, 1.0, 10), DomainError);
    EXPECT_THROW(EnergyGrid(0.0, 0.0, 11), DomainError);
    EXPECT_EQ(EnergyGrid(0.5, 1.0, 1).size(), 1u);
}
