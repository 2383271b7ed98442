#pragma once

// Signal-to-noise ratio of repeated single-photon energy readings under slow,
// exponentially correlated noise, with and without post-selection.
//
// Model: attempts sit on a regular lattice of spacing 1/rate over total_time;
// each reading carries stationary Gaussian noise with autocovariance
// sigma^2 exp(-dt / tau_c); the estimator is the sample mean. Post-selection
// keeps each attempt independently with probability P.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wva/errors.hpp"
#include "wva/numerics.hpp"
#include "wva/postselect.hpp"
#include "wva/spectral_core.hpp"

namespace wva {

enum class EmptyTrialPolicy { error, resample };

struct SlowNoiseConfig {
    double sigma = 1.0;
    double tau_c = 1e3;
    double t1 = 1.0;
    double pump_rate = 1.0;
    double total_time = 1e6;
    int trials = 500;
    std::uint64_t seed = 1;
    EmptyTrialPolicy empty_trials = EmptyTrialPolicy::error;

    double max_rate() const { return 1.0 / t1; }

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw DomainError("SlowNoiseConfig: sigma must be > 0");
        if (!(tau_c > 0.0)) throw DomainError("SlowNoiseConfig: tau_c must be > 0");
        if (!(t1 > 0.0) || !std::isfinite(t1)) throw DomainError("SlowNoiseConfig: t1 must be > 0");
        if (!(total_time > 0.0) || !std::isfinite(total_time))
            throw DomainError("SlowNoiseConfig: total_time must be > 0");
        if (trials < 1) throw DomainError("SlowNoiseConfig: trials must be >= 1");
        check_rate(pump_rate);
    }

    // Admissible rates are (0, 1/T1]: a single emitter reloads at most once per lifetime.
    void check_rate(double rate) const {
        if (!(rate > 0.0) || !std::isfinite(rate))
            throw DomainError("event rate must be finite and > 0");
        if (rate > max_rate() * (1.0 + 1e-12))
            throw PumpCeilingError("event rate exceeds the 1/T1 reload ceiling");
    }
};

enum class SnrMethod { analytic, monte_carlo };

inline const char* to_string(SnrMethod m) {
    return m == SnrMethod::analytic ? "analytic" : "monte_carlo";
}

struct SnrResult {
    double snr = 0.0;
    std::uint64_t n_events = 0;  // lattice attempts (analytic) or mean retained events (MC)
    double effective_rate = 0.0;
    SnrMethod method = SnrMethod::analytic;
    std::optional<double> std_error;  // Monte Carlo only
};

// Variance of the mean of n equally spaced samples of a stationary process
// with autocorrelation rho^k:
//   (sigma^2 / n) [1 + (2/n) sum_{k=1}^{n-1} (n - k) rho^k].
// With rho = exp(-a) the bracket is coth(a/2) - (1 - rho^n) / (2 n sinh^2(a/2));
// for n a << 1 a second-order expansion in a replaces it.
inline double ar1_variance_of_mean(std::uint64_t n, double rho, double sigma) {
    if (n < 1) throw DomainError("ar1_variance_of_mean: n must be >= 1");
    if (!(rho >= 0.0) || !(rho <= 1.0)) throw DomainError("ar1_variance_of_mean: rho must be in [0, 1]");
    const double s2 = sigma * sigma;
    const double nd = static_cast<double>(n);
    if (n == 1) return s2;
    if (rho == 0.0) return s2 / nd;
    if (rho == 1.0) return s2;
    const double a = -std::log(rho);
    double bracket = 0.0;
    if (nd * a < 1e-4) {
        // n * bracket = sum_{i,j} rho^{|i-j|} = n^2 - a (n^3 - n)/3 + a^2 n^2 (n^2 - 1)/12 + ...
        const double n2m1 = nd * nd - 1.0;
        bracket = nd - a * n2m1 / 3.0 + a * a * nd * n2m1 / 12.0;
    } else {
        const double sh = std::sinh(0.5 * a);
        bracket = 1.0 / std::tanh(0.5 * a) + std::expm1(-nd * a) / (2.0 * nd * sh * sh);
    }
    return s2 * bracket / nd;
}

// The relative nudge keeps products such as 1e-5 * 1e6 from flooring to 9.
inline std::uint64_t lattice_events(double rate, double total_time) {
    return static_cast<std::uint64_t>(std::floor(rate * total_time * (1.0 + 1e-12)));
}

// Correlation between consecutive lattice readings.
inline double lattice_correlation(double rate, double tau_c) {
    return std::exp(-1.0 / (rate * tau_c));
}

// Sample-mean SNR with correlated noise at `rate` events per unit time.
inline SnrResult snr_analytic(double signal, const SlowNoiseConfig& cfg, double rate) {
    cfg.check_rate(rate);
    SnrResult r;
    r.method = SnrMethod::analytic;
    r.effective_rate = rate;
    r.n_events = lattice_events(rate, cfg.total_time);
    if (r.n_events == 0) return r;
    const double var =
        ar1_variance_of_mean(r.n_events, lattice_correlation(rate, cfg.tau_c), cfg.sigma);
    r.snr = std::abs(signal) / std::sqrt(var);
    return r;
}

// Same estimator with independent readings: the sqrt(N) envelope set by the
// reload ceiling alone.
inline SnrResult snr_no_noise(double signal, const SlowNoiseConfig& cfg, double rate) {
    cfg.check_rate(rate);
    SnrResult r;
    r.effective_rate = rate;
    r.n_events = lattice_events(rate, cfg.total_time);
    if (r.n_events == 0) return r;
    r.snr = std::abs(signal) * std::sqrt(static_cast<double>(r.n_events)) / cfg.sigma;
    return r;
}

// Analytic model matched to Bernoulli thinning of the lattice: the gap between
// retained readings is geometric, so consecutive retained readings correlate as
// E[rho0^K] = p rho0 / (1 - (1 - p) rho0), and there are p n0 of them on average.
inline SnrResult snr_analytic_thinned(double signal, const SlowNoiseConfig& cfg, double rate,
                                      double select_prob) {
    cfg.check_rate(rate);
    if (!(select_prob > 0.0) || select_prob > 1.0)
        throw DomainError("snr_analytic_thinned: select_prob must be in (0, 1]");
    SnrResult r;
    r.effective_rate = rate * select_prob;
    const double n0 = static_cast<double>(lattice_events(rate, cfg.total_time));
    const double mean_events = n0 * select_prob;
    r.n_events = static_cast<std::uint64_t>(std::llround(mean_events));
    if (r.n_events == 0) return r;
    const double rho0 = lattice_correlation(rate, cfg.tau_c);
    const double rho = select_prob * rho0 / (1.0 - (1.0 - select_prob) * rho0);
    r.snr = std::abs(signal) / std::sqrt(ar1_variance_of_mean(r.n_events, rho, cfg.sigma));
    return r;
}

struct NoiseEvent {
    double time;
    double noise;
};

// Calls visit(time, noise) for each retained lattice attempt. The noise is
// advanced exactly between retained readings:
//   n' = rho n + sigma sqrt(1 - rho^2) xi,  rho = exp(-dt / tau_c).
template <class Visit>
std::uint64_t for_each_event(const SlowNoiseConfig& cfg, double rate, double select_prob,
                             RandomStream& rng, Visit&& visit) {
    const std::uint64_t n0 = lattice_events(rate, cfg.total_time);
    const double spacing = 1.0 / rate;
    std::uint64_t index = 0;
    std::uint64_t count = 0;
    double noise = 0.0;
    double last_time = 0.0;
    const bool thin = select_prob < 1.0;
    while (true) {
        if (thin) index += rng.geometric(select_prob);
        if (index >= n0) break;
        const double t = static_cast<double>(index) * spacing;
        if (count == 0) {
            noise = cfg.sigma * rng.normal();
        } else {
            const double rho = std::exp(-(t - last_time) / cfg.tau_c);
            noise = rho * noise + cfg.sigma * std::sqrt((1.0 - rho) * (1.0 + rho)) * rng.normal();
        }
        visit(t, noise);
        last_time = t;
        ++count;
        ++index;
    }
    return count;
}

// Event stream of one run; deterministic given (seed, stream_id).
inline std::vector<NoiseEvent> simulate_events(const SlowNoiseConfig& cfg, double rate,
                                               double select_prob, std::uint64_t stream_id = 0) {
    cfg.check_rate(rate);
    if (!(select_prob > 0.0) || select_prob > 1.0)
        throw DomainError("simulate_events: select_prob must be in (0, 1]");
    RandomStream rng = seeded_stream(cfg.seed, stream_id);
    std::vector<NoiseEvent> events;
    for_each_event(cfg, rate, select_prob, rng,
                   [&](double t, double n) { events.push_back({t, n}); });
    return events;
}

// Per trial: estimate = signal + mean noise over retained readings. SNR is
// signal / std(estimates); its standard error uses the Gaussian sampling
// distribution of the standard deviation, SNR / sqrt(2 (trials - 1)).
inline SnrResult snr_monte_carlo(double signal, const SlowNoiseConfig& cfg, double rate,
                                 double select_prob) {
    cfg.validate();
    cfg.check_rate(rate);
    if (!(select_prob > 0.0) || select_prob > 1.0)
        throw DomainError("snr_monte_carlo: select_prob must be in (0, 1]");
    if (cfg.trials < 2) throw DomainError("snr_monte_carlo: needs at least 2 trials");

    constexpr int kMaxResample = 64;
    const auto trials = static_cast<std::uint64_t>(cfg.trials);
    double mean = 0.0;
    double m2 = 0.0;
    double events_total = 0.0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        double sum = 0.0;
        std::uint64_t kept = 0;
        for (int attempt = 0; attempt <= kMaxResample; ++attempt) {
            RandomStream rng = seeded_stream(
                cfg.seed, trial + (static_cast<std::uint64_t>(attempt) << 40));
            sum = 0.0;
            kept = for_each_event(cfg, rate, select_prob, rng,
                                  [&](double, double n) { sum += n; });
            if (kept > 0 || cfg.empty_trials == EmptyTrialPolicy::error) break;
        }
        if (kept == 0)
            throw EmptyTrialError("snr_monte_carlo: a trial retained no events (trial " +
                                  std::to_string(trial) + ")");
        events_total += static_cast<double>(kept);
        const double estimate = signal + sum / static_cast<double>(kept);
        const double k = static_cast<double>(trial + 1);
        const double d = estimate - mean;
        mean += d / k;
        m2 += d * (estimate - mean);
    }
    const double sd = std::sqrt(m2 / static_cast<double>(trials - 1));
    SnrResult r;
    r.method = SnrMethod::monte_carlo;
    r.effective_rate = rate * select_prob;
    r.n_events = static_cast<std::uint64_t>(std::llround(events_total / static_cast<double>(trials)));
    r.snr = std::abs(signal) / sd;
    r.std_error = r.snr / std::sqrt(2.0 * static_cast<double>(trials - 1));
    return r;
}

// Conventional measurement: the splitting itself is the signal, every attempt counts.
inline SnrResult snr_conventional(const SpectralParams& params, const SlowNoiseConfig& cfg,
                                  double rate, SnrMethod method = SnrMethod::analytic) {
    if (method == SnrMethod::monte_carlo) return snr_monte_carlo(params.delta_e, cfg, rate, 1.0);
    return snr_analytic(params.delta_e, cfg, rate);
}

// Post-selected measurement at cfg.pump_rate: signal is the exact mean shift,
// readings survive with probability P. The analytic path evaluates the
// correlated-noise SNR at the thinned rate pump_rate * P.
inline SnrResult snr_wva(const SpectralParams& params, const PostSelection& sel,
                         const SlowNoiseConfig& cfg, SnrMethod method = SnrMethod::analytic,
                         const PostselectOptions& opts = {}) {
    cfg.validate();
    const ShiftResult s = mean_energy_shift(params, sel, opts);
    if (method == SnrMethod::monte_carlo)
        return snr_monte_carlo(s.mean_shift, cfg, cfg.pump_rate, s.probability);
    return snr_analytic(s.mean_shift, cfg, cfg.pump_rate * s.probability);
}

enum class DeltaMode { fixed, reoptimized };

struct Fig3Row {
    double rate = 0.0;
    double snr_no_noise = 0.0;
    double snr_conventional = 0.0;
    double snr_wva = 0.0;
    double delta = 0.0;  // post-selection used for the WVA column
    SnrMethod method = SnrMethod::analytic;
};

// Best analytic WVA SNR over delta at the configured pump rate.
inline ScalarOptimum optimal_snr_delta(const SpectralParams& params, const SlowNoiseConfig& cfg,
                                       const PostselectOptions& opts = {}) {
    OptimizerSpec search = default_delta_search();
    search.lo = 1e-6;
    search.starts = 3;
    return maximize_scalar(
        [&](double d) { return snr_wva(params, PostSelection{d}, cfg, SnrMethod::analytic, opts).snr; },
        search);
}

// One row per pump rate: no-noise envelope, conventional and post-selected SNR.
inline std::vector<Fig3Row> sweep_fig3(const SpectralParams& params, const PostSelection& sel,
                                       SlowNoiseConfig cfg, const std::vector<double>& rates,
                                       SnrMethod method = SnrMethod::analytic,
                                       DeltaMode mode = DeltaMode::fixed,
                                       const PostselectOptions& opts = {}) {
    std::vector<Fig3Row> rows;
    rows.reserve(rates.size());
    for (double rate : rates) {
        cfg.check_rate(rate);
        cfg.pump_rate = rate;
        Fig3Row row;
        row.rate = rate;
        row.method = method;
        row.delta = sel.delta;
        if (mode == DeltaMode::reoptimized) row.delta = optimal_snr_delta(params, cfg, opts).argmax;
        row.snr_no_noise = snr_no_noise(params.delta_e, cfg, rate).snr;
        row.snr_conventional = snr_conventional(params, cfg, rate, method).snr;
        row.snr_wva = snr_wva(params, PostSelection{row.delta}, cfg, method, opts).snr;
        rows.push_back(row);
    }
    return rows;
}

// Knee of a log-log curve: the interior sample of maximum curvature
// |y''| / (1 + y'^2)^{3/2}, with derivatives from central differences on the
// (possibly non-uniform) log abscissa.
inline std::optional<std::size_t> knee_index(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) return std::nullopt;
    std::vector<double> lx(x.size());
    std::vector<double> ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    std::optional<std::size_t> best;
    double best_k = -1.0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double h0 = lx[i] - lx[i - 1];
        const double h1 = lx[i + 1] - lx[i];
        const double s0 = (ly[i] - ly[i - 1]) / h0;
        const double s1 = (ly[i + 1] - ly[i]) / h1;
        const double d1 = (s0 * h1 + s1 * h0) / (h0 + h1);
        const double d2 = 2.0 * (s1 - s0) / (h0 + h1);
        const double k = std::abs(d2) / std::pow(1.0 + d1 * d1, 1.5);
        if (k > best_k) {
            best_k = k;
            best = i;
        }
    }
    return best;
}

}  // namespace wva
