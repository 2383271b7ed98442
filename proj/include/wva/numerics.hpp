#pragma once

// Shared numerical machinery: paired tan-substitution quadrature, golden-section
// maximization and seeded random streams.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "wva/errors.hpp"

namespace wva {

namespace detail {

inline bool is_finite_value(double v) { return std::isfinite(v); }
inline bool is_finite_value(const std::complex<double>& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

enum class Transform { tan_substitution, linear };

struct QuadratureSpec {
    int order = 16;   // Gauss-Legendre nodes per panel
    int panels = 64;  // panels on the half-range [0, theta_max]
    Transform transform = Transform::tan_substitution;
    double tolerance = 1e-10;

    void validate() const {
        if (order < 2) throw DomainError("QuadratureSpec: order must be >= 2");
        if (panels < 1) throw DomainError("QuadratureSpec: panels must be >= 1");
        if (!(tolerance > 0.0)) throw DomainError("QuadratureSpec: tolerance must be > 0");
    }

    // Same rule with twice as many nodes; used for order-doubling checks.
    QuadratureSpec refined() const {
        QuadratureSpec r = *this;
        r.panels *= 2;
        return r;
    }
};

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

// Nodes and weights by Newton iteration on the Legendre three-term recurrence.
inline GaussLegendreRule gauss_legendre(int order) {
    if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.assign(static_cast<std::size_t>(order), 0.0);
    rule.weights.assign(static_cast<std::size_t>(order), 0.0);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(order - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
    }
    if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
    return rule;
}

// Integrates f over the real line (or over [center - limit, center + limit])
// after the substitution E = center + scale * tan(theta). Nodes are visited in
// mirrored pairs center +/- x and the pair is summed before it is weighted, so
// integrands with odd 1/x tails converge to their symmetric principal value and
// odd integrands cancel exactly. With Transform::linear the domain is
// [center - scale, center + scale] and no substitution is applied.
template <class F>
auto integrate_transformed(F&& f, double center, double scale, const QuadratureSpec& spec,
                           double limit = std::numeric_limits<double>::infinity()) {
    using Value = std::decay_t<std::invoke_result_t<F&, double>>;
    spec.validate();
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw DomainError("integrate_transformed: scale must be finite and > 0");
    if (!(limit > 0.0)) throw DomainError("integrate_transformed: limit must be > 0");

    const GaussLegendreRule rule = gauss_legendre(spec.order);
    const bool tan_map = spec.transform == Transform::tan_substitution;
    const double upper = tan_map ? (std::isinf(limit) ? std::numbers::pi / 2.0
                                                      : std::atan(limit / scale))
                                 : std::min(scale, limit);
    const double width = upper / spec.panels;

    Value total{};
    for (int p = 0; p < spec.panels; ++p) {
        const double mid = (p + 0.5) * width;
        const double half = 0.5 * width;
        Value panel{};
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double t = mid + half * rule.nodes[k];
            double x = t;
            double jac = 1.0;
            if (tan_map) {
                const double c = std::cos(t);
                x = scale * std::tan(t);
                jac = scale / (c * c);
            }
            const Value hi = f(center + x);
            const Value lo = f(center - x);
            if (!detail::is_finite_value(hi) || !detail::is_finite_value(lo)) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "integrate_transformed: non-finite integrand at E = "
                    << (detail::is_finite_value(hi) ? center - x : center + x);
                throw NumericError(msg.str());
            }
            panel += (hi + lo) * (rule.weights[k] * jac);
        }
        total += panel * half;
    }
    return total;
}

template <class Value>
struct CheckedIntegral {
    Value value;             // result with the refined rule
    double error_estimate;   // |refined - base|
};

// Evaluates with `spec` and with twice the panels; the difference is the
// reported error estimate.
template <class F>
auto integrate_with_estimate(F&& f, double center, double scale, const QuadratureSpec& spec,
                             double limit = std::numeric_limits<double>::infinity()) {
    const auto base = integrate_transformed(f, center, scale, spec, limit);
    const auto fine = integrate_transformed(f, center, scale, spec.refined(), limit);
    using Value = std::decay_t<decltype(fine)>;
    return CheckedIntegral<Value>{fine, std::abs(fine - base)};
}

// ---------------------------------------------------------------------------
// Scalar maximization
// ---------------------------------------------------------------------------

struct OptimizerSpec {
    double lo = 0.0;
    double hi = 1.0;
    double tol = 1e-8;
    int max_iter = 200;
    int starts = 1;  // equal sub-brackets searched independently

    void validate() const {
        if (!(lo < hi)) throw DomainError("OptimizerSpec: lo must be < hi");
        if (!(tol > 0.0)) throw DomainError("OptimizerSpec: tol must be > 0");
        if (max_iter < 1) throw DomainError("OptimizerSpec: max_iter must be >= 1");
        if (starts < 1) throw DomainError("OptimizerSpec: starts must be >= 1");
    }
};

struct ScalarOptimum {
    double argmax;
    double value;
    int iterations;  // largest iteration count among the starts
};

inline constexpr double kGoldenRatio = std::numbers::phi;

// Golden-section search. Assumes g is unimodal on each sub-bracket; with
// starts > 1 the best of the independent searches is returned.
template <class G>
ScalarOptimum maximize_scalar(G&& g, const OptimizerSpec& spec) {
    spec.validate();
    constexpr double inv_phi = 1.0 / kGoldenRatio;
    ScalarOptimum best{0.0, -std::numeric_limits<double>::infinity(), 0};
    const double span = (spec.hi - spec.lo) / spec.starts;
    for (int s = 0; s < spec.starts; ++s) {
        double a = spec.lo + s * span;
        double b = (s + 1 == spec.starts) ? spec.hi : a + span;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double gc = g(c);
        double gd = g(d);
        int iter = 0;
        while (b - a > spec.tol) {
            if (++iter > spec.max_iter)
                throw ConvergenceError("maximize_scalar: max_iter exceeded");
            if (gc >= gd) {
                b = d;
                d = c;
                gd = gc;
                c = b - inv_phi * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + inv_phi * (b - a);
                gd = g(d);
            }
        }
        const double x = 0.5 * (a + b);
        const double gx = g(x);
        if (gx > best.value) best = ScalarOptimum{x, gx, best.iterations};
        best.iterations = std::max(best.iterations, iter);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Seeded random streams
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

#if defined(__GLIBCXX__)
inline constexpr const char* kNormalSampler = "std::normal_distribution(libstdc++ polar)";
#elif defined(_LIBCPP_VERSION)
inline constexpr const char* kNormalSampler = "std::normal_distribution(libc++)";
#else
inline constexpr const char* kNormalSampler = "std::normal_distribution";
#endif

inline std::string rng_algorithm() {
    return std::string("mt19937_64; seed_seq from splitmix64(master_seed ^ stream_id mix); ") +
           kNormalSampler + "; std::geometric_distribution";
}

// Independently owned random stream; never shared between consumers.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t state = master_seed;
        const std::uint64_t a = splitmix64(state);
        state ^= stream_id * 0xD1B54A32D192ED03ULL;
        std::array<std::uint32_t, 8> words{};
        std::uint64_t mix = a ^ splitmix64(state);
        for (std::size_t i = 0; i < words.size(); i += 2) {
            const std::uint64_t v = splitmix64(mix);
            words[i] = static_cast<std::uint32_t>(v);
            words[i + 1] = static_cast<std::uint32_t>(v >> 32);
        }
        std::seed_seq seq(words.begin(), words.end());
        engine_.seed(seq);
    }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    // Number of failures before the first success of a Bernoulli(p) sequence.
    std::uint64_t geometric(double p) {
        return std::geometric_distribution<std::uint64_t>(p)(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline RandomStream seeded_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return RandomStream(master_seed, stream_id);
}

}  // namespace wva
