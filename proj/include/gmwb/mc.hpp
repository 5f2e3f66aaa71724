#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gmwb/model.hpp"
#include "gmwb/rng.hpp"
#include "gmwb/schedule.hpp"

namespace gmwb {

struct MCConfig {
    std::int64_t n_paths = 100000;
    std::uint64_t seed = 0;
    bool antithetic = false;
};

struct PricingResult {
    double value = 0.0;
    std::optional<double> std_error;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> breakdown; // discounted E[Z^(t)] per claim date, t = 1..N

    std::string to_json() const {
        std::ostringstream os;
        os.precision(17);
        os << "{\"value\":" << value << ",\"std_error\":";
        if (std_error) os << *std_error;
        else os << "null";
        os << ",\"n_paths\":" << n_paths << ",\"seed\":" << seed << ",\"breakdown\":[";
        for (std::size_t i = 0; i < breakdown.size(); ++i)
            os << (i ? "," : "") << breakdown[i];
        os << "]}";
        return os.str();
    }
};

namespace detail {

inline void validate_mc(const MCConfig& mc) {
    require(mc.n_paths >= 100, "MCConfig: n_paths must be >= 100");
    if (mc.antithetic) require(mc.n_paths % 2 == 0, "MCConfig: antithetic needs even n_paths");
}

// One path of the (possibly ratcheting) withdrawal fund; returns the
// discounted claim per period. The plain guarantee is the infinite-base
// special case: the withdrawal level then never moves.
template <class Uniform>
inline double guarantee_path(const OneFactorModel& model, const GuaranteeSpec& spec,
                             bool with_rollup, Uniform&& uniform, std::vector<double>& claims) {
    const Schedule& sch = spec.schedule;
    const int n = sch.n_periods;
    double x = spec.initial_capital;
    double w_cur = sch.withdrawal;
    double df = 1.0;
    const double df_step = std::exp(-model.rate() * sch.dt);
    int tau = 0; // 0 = not yet depleted
    double total = 0.0;
    for (int t = 1; t <= n; ++t) {
        const double r = std::exp(model.sample_log_return(t - 1, uniform()));
        x = x * r - w_cur;
        df *= df_step;
        double z = 0.0;
        if (tau == 0 && x <= 0.0) tau = t;
        if (tau != 0) z = (tau == t) ? -std::min(x, 0.0) : w_cur;
        claims[static_cast<std::size_t>(t - 1)] += df * z;
        total += df * z;
        if (with_rollup && tau == 0 && t <= n - 1) {
            const double base = guarantee_base(t, spec);
            if (std::isfinite(base)) w_cur = std::max(w_cur, x / base);
        }
    }
    return total;
}

template <class PathFn>
inline PricingResult run_paths(const MCConfig& mc, int n_claims, PathFn&& path_fn) {
    validate_mc(mc);
    PricingResult res;
    res.seed = mc.seed;
    res.n_paths = mc.n_paths;
    res.breakdown.assign(static_cast<std::size_t>(n_claims), 0.0);
    const std::int64_t n_samples = mc.antithetic ? mc.n_paths / 2 : mc.n_paths;
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> claims(static_cast<std::size_t>(n_claims), 0.0);
    for (std::int64_t i = 0; i < n_samples; ++i) {
        auto rng = path_stream(mc.seed, static_cast<std::uint64_t>(i));
        double v;
        if (mc.antithetic) {
            std::vector<double> uniforms;
            auto recording = [&]() {
                const double u = rng.uniform();
                uniforms.push_back(u);
                return u;
            };
            const double v1 = path_fn(recording, claims);
            std::size_t idx = 0;
            auto mirrored = [&]() { return 1.0 - uniforms[idx++]; };
            const double v2 = path_fn(mirrored, claims);
            v = 0.5 * (v1 + v2);
        } else {
            auto draw = [&]() { return rng.uniform(); };
            v = path_fn(draw, claims);
        }
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(n_samples);
    res.value = sum / n;
    const double var = std::max(0.0, sumsq / n - res.value * res.value);
    res.std_error = std::sqrt(var / n);
    const double claim_scale = mc.antithetic ? 0.5 / n : 1.0 / n;
    for (std::size_t i = 0; i < claims.size(); ++i) res.breakdown[i] = claims[i] * claim_scale;
    return res;
}

} // namespace detail

/// Direct Monte-Carlo value of the plain withdrawal guarantee,
/// V_0 = E[w (N - tau)^+ + X_tau^- 1_{tau <= N}] under zero rates.
inline PricingResult mc_guarantee_value(const OneFactorModel& model, const GuaranteeSpec& spec,
                                        const MCConfig& mc) {
    detail::require(model.n_periods() >= spec.schedule.n_periods,
                    "mc_guarantee_value: model has too few periods");
    return detail::run_paths(mc, spec.schedule.n_periods, [&](auto&& uniform, auto& claims) {
        return detail::guarantee_path(model, spec, /*with_rollup=*/false, uniform, claims);
    });
}

/// Put on the multi-contribution fund: pays (K - Y_{N-})^+ at T_N where
/// Y_{N-} = Y_N - p.
inline PricingResult mc_put_on_contribution_fund(const OneFactorModel& model, double p, double strike,
                                                 int n_periods, const MCConfig& mc) {
    detail::require(p > 0.0, "mc_put_on_contribution_fund: p must be > 0");
    detail::require(strike >= 0.0, "mc_put_on_contribution_fund: strike must be >= 0");
    detail::require(model.n_periods() >= n_periods,
                    "mc_put_on_contribution_fund: model has too few periods");
    const double df_total = model.period_discount(0, n_periods);
    return detail::run_paths(mc, 1, [&](auto&& uniform, auto& claims) {
        double y = p;
        for (int t = 0; t < n_periods - 1; ++t)
            y = y * std::exp(model.sample_log_return(t, uniform())) + p;
        const double y_pre = y * std::exp(model.sample_log_return(n_periods - 1, uniform()));
        const double payoff = df_total * std::max(strike - y_pre, 0.0);
        claims[0] += payoff;
        return payoff;
    });
}

/// Model self-test: Monte-Carlo vanilla put over a span of periods.
inline PricingResult mc_vanilla_put(const OneFactorModel& model, double strike,
                                    int maturity_periods, const MCConfig& mc) {
    detail::require(strike >= 0.0, "mc_vanilla_put: strike must be >= 0");
    detail::require(model.n_periods() >= maturity_periods && maturity_periods >= 1,
                    "mc_vanilla_put: bad maturity");
    const double df = model.period_discount(0, maturity_periods);
    return detail::run_paths(mc, 1, [&](auto&& uniform, auto& claims) {
        double s = 1.0;
        for (int t = 0; t < maturity_periods; ++t)
            s *= std::exp(model.sample_log_return(t, uniform()));
        const double payoff = df * std::max(strike - s, 0.0);
        claims[0] += payoff;
        return payoff;
    });
}

} // namespace gmwb
