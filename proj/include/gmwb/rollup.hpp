#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "gmwb/mc.hpp"
#include "gmwb/model.hpp"
#include "gmwb/schedule.hpp"
#include "gmwb/weights.hpp"

namespace gmwb {

/// Ratchet of the guaranteed withdrawal level, w_t = max(w_{t-1}, X_t / A_t).
inline double rollup_withdrawal_update(double w_prev, double fund_value, double base) {
    detail::require(w_prev > 0.0, "rollup_withdrawal_update: w_prev must be > 0");
    if (!std::isfinite(base)) return w_prev;
    return std::max(w_prev, fund_value / base);
}

/// Per-period coefficients of the semi-static roll-up hedge. beta stores the
/// positive put quantity -d/dX Vbar_{t+1}(1, A_{t+1}-0); the weight lives on
/// the moneyness grid k in [1, 1+A_{t+1}] with the terminal Dirac at 1.
struct RollupCoefficients {
    int period = 0;
    double alpha = 0.0;
    double beta = 0.0;
    WeightCurve weight;
};

struct RollupGridConfig {
    int points = 1001;    // moneyness grid points, forced odd
    double sd_mult = 16.0;
};

namespace detail {

// integral of fn against curve density (Simpson) plus the atom term
template <class Fn>
inline double curve_against(const WeightCurve& c, Fn&& fn) {
    double acc = 0.0;
    if (c.has_grid()) {
        std::vector<double> f(c.density.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = c.density[i] * fn(c.strikes[i]);
        acc = simpson(f, c.grid_step());
    }
    if (c.atom) acc += c.atom->mass * fn(c.atom->location);
    return acc;
}

// moneyness bound for the period-t rollup weight from the plain-curve law
inline double rollup_moneyness_bound(const OneFactorModel& model, const Schedule& sch, int t,
                                     double sd_mult) {
    double mean = sch.withdrawal, var = 0.0;
    for (int u = sch.n_periods - 1; u >= t + 1; --u) {
        double m2, v2;
        propagate_moments(sch.withdrawal, mean, var, std::exp(model.rate() * model.period_dt()),
                          model.period_return_variance(u), m2, v2);
        mean = m2;
        var = v2;
    }
    return 1.0 + (mean + sd_mult * std::sqrt(var)) / sch.withdrawal;
}

} // namespace detail

/// Backward recursion of (alpha_t, beta_t, g^R_t) from the terminal
/// (0, 0, delta_1).
inline std::vector<RollupCoefficients> build_rollup_coefficients(const OneFactorModel& model,
                                                                 const GuaranteeSpec& spec,
                                                                 const RollupGridConfig& cfg = {}) {
    detail::require(spec.rollup.has_value(), "build_rollup_coefficients: spec has no rollup");
    detail::require(model.satisfies_a2(), "build_rollup_coefficients: model must satisfy (A2)");
    const Schedule& sch = spec.schedule;
    const int n = sch.n_periods;
    detail::require(model.n_periods() >= n, "build_rollup_coefficients: model too short");

    std::vector<RollupCoefficients> coeffs(static_cast<std::size_t>(n));
    coeffs[static_cast<std::size_t>(n - 1)] =
        RollupCoefficients{n - 1, 0.0, 0.0, WeightCurve::dirac(n - 1, 1.0)};

    for (int t = n - 2; t >= 0; --t) {
        const auto& next = coeffs[static_cast<std::size_t>(t + 1)];
        const double a1 = guarantee_base(t + 1, spec); // A_{t+1}, finite for t+1 < N
        const double a2 = guarantee_base(t + 2, spec); // A_{t+2}, inf at the last step
        detail::require(std::isfinite(a1), "build_rollup_coefficients: A_{t+1} must be finite");
        const int p = t + 1; // option period of this step

        RollupCoefficients cur;
        cur.period = t;

        const double strike_top = 1.0 + a2;
        double alpha = 0.0, beta_neg = 0.0;
        if (std::isfinite(a2)) {
            alpha += next.alpha * (1.0 + model.call(p, strike_top, a1) / a2);
            alpha += next.beta * model.put(p, strike_top, a1);
            beta_neg += next.alpha / a2 * model.call_delta(p, strike_top, a1);
            beta_neg += next.beta * model.put_delta(p, strike_top, a1);
        }
        alpha += detail::curve_against(next.weight,
                                       [&](double k) { return model.put(p, k, a1); });
        beta_neg += detail::curve_against(next.weight,
                                          [&](double k) { return model.put_delta(p, k, a1); });
        cur.alpha = alpha;
        cur.beta = -beta_neg;

        // weight function on [1, 1 + A_{t+1}], truncated where the plain
        // hedge density has provably negligible mass
        const double k_hi =
            std::min(1.0 + a1, detail::rollup_moneyness_bound(model, sch, t, cfg.sd_mult));
        detail::KernelApplier kernel(model, p);
        const double gamma_coef =
            (std::isfinite(a2) ? next.alpha / a2 : 0.0) + next.beta;
        WeightCurve wc;
        wc.period = t;
        wc.strikes = linspace(1.0, k_hi, cfg.points | 1);
        wc.density.resize(wc.strikes.size());
        for (std::size_t i = 0; i < wc.strikes.size(); ++i) {
            const double x = wc.strikes[i] - 1.0;
            double g = kernel(next.weight, x);
            if (gamma_coef != 0.0 && std::isfinite(a2) && x > 0.0)
                g += gamma_coef * model.gamma(p, strike_top, x);
            if (g < 0.0) {
                if (g < -1e-10)
                    throw numerical_error("build_rollup_coefficients: negative weight density",
                                          -g);
                g = 0.0; // clip tiny negative quadrature noise
            }
            wc.density[i] = g;
        }
        wc.finalize();
        cur.weight = std::move(wc);
        coeffs[static_cast<std::size_t>(t)] = std::move(cur);
    }
    return coeffs;
}

struct HedgeLeg {
    enum class Type { cash, call, put, put_strip_node };
    Type type;
    double strike = 0.0;
    double quantity = 0.0;
};

inline const char* to_string(HedgeLeg::Type t) {
    switch (t) {
    case HedgeLeg::Type::cash: return "cash";
    case HedgeLeg::Type::call: return "call";
    case HedgeLeg::Type::put: return "put";
    default: return "put_strip_node";
    }
}

struct RollupValue {
    double value = 0.0;
    std::vector<HedgeLeg> legs;
};

/// Hedge portfolio and value of the roll-up guarantee at period t:
/// cash + call + put at strike w_t (1 + A_{t+1}) plus the put strip.
inline RollupValue rollup_value(const OneFactorModel& model, const GuaranteeSpec& spec,
                                const std::vector<RollupCoefficients>& coeffs, double w_t,
                                double fund_value, int t) {
    detail::require(w_t > 0.0, "rollup_value: w_t must be > 0");
    detail::require(fund_value > 0.0, "rollup_value: fund value must be > 0");
    const int n = spec.schedule.n_periods;
    detail::require(t >= 0 && t < n, "rollup_value: bad period");
    const auto& c = coeffs[static_cast<std::size_t>(t)];
    const double a1 = guarantee_base(t + 1, spec);

    RollupValue out;
    if (c.alpha != 0.0) {
        out.legs.push_back({HedgeLeg::Type::cash, 0.0, c.alpha * w_t});
        out.value += c.alpha * w_t;
    }
    if (std::isfinite(a1)) {
        const double strike_top = w_t * (1.0 + a1);
        if (c.alpha != 0.0) {
            const double qty = c.alpha / a1;
            out.legs.push_back({HedgeLeg::Type::call, strike_top, qty});
            out.value += qty * model.call(t, strike_top, fund_value);
        }
        if (c.beta != 0.0) {
            out.legs.push_back({HedgeLeg::Type::put, strike_top, c.beta});
            out.value += c.beta * model.put(t, strike_top, fund_value);
        }
    }
    // put strip over strikes w_t k
    out.value += detail::curve_against(c.weight,
                                       [&](double k) { return model.put(t, w_t * k, fund_value); });
    if (c.weight.atom)
        out.legs.push_back(
            {HedgeLeg::Type::put, w_t * c.weight.atom->location, c.weight.atom->mass});
    if (c.weight.has_grid()) {
        const double h = c.weight.grid_step();
        for (std::size_t i = 0; i < c.weight.strikes.size(); ++i) {
            const double width =
                (i == 0 || i + 1 == c.weight.strikes.size()) ? 0.5 * h : h;
            const double qty = c.weight.density[i] * width;
            if (qty > 1e-14)
                out.legs.push_back(
                    {HedgeLeg::Type::put_strip_node, w_t * c.weight.strikes[i], qty});
        }
    }
    return out;
}

/// Direct Monte-Carlo oracle with per-path ratcheting withdrawal levels.
inline PricingResult mc_rollup_value(const OneFactorModel& model, const GuaranteeSpec& spec,
                                     const MCConfig& mc) {
    detail::require(model.n_periods() >= spec.schedule.n_periods,
                    "mc_rollup_value: model has too few periods");
    return detail::run_paths(mc, spec.schedule.n_periods, [&](auto&& uniform, auto& claims) {
        return detail::guarantee_path(model, spec, /*with_rollup=*/true, uniform, claims);
    });
}

} // namespace gmwb
