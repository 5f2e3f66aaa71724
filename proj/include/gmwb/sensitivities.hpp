#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "gmwb/black_scholes.hpp"
#include "gmwb/schedule.hpp"
#include "gmwb/weights.hpp"

namespace gmwb {

struct SensitivityConfig {
    double bump = 1e-3; // absolute bump of the annualized forward volatility
    WeightGridConfig grid;
};

/// Forward vega/volga per forward period and the net volga after hedging
/// each forward vega with a forward-starting variance swap (whose volga is
/// vega / volatility).
struct VolgaReport {
    double moneyness = 0.0;
    std::vector<double> vega;  // d V_0 / d Sigma_t, t = 1..N-1 (index t-1)
    std::vector<double> volga; // d^2 V_0 / d Sigma_t^2
    double vega_total = 0.0;
    double volga_total = 0.0;
    double net_volga = 0.0; // sum_t (vega_t / Sigma_t - volga_t)
};

namespace detail {

inline double weights_value_for(const BlackScholesModel& model, const Schedule& sch, double x0,
                                const WeightGridConfig& cfg,
                                const std::vector<std::vector<double>>* grids) {
    auto curves = build_weight_curves(model, sch, cfg, grids);
    return value_from_weights(model, curves[0], x0);
}

} // namespace detail

/// Central finite differences of the full weight pipeline in the single
/// forward volatility Sigma_{t_target}; grids are pinned to the base run so
/// the bumps see a smooth functional.
inline std::pair<double, double> forward_vega_volga(const BlackScholesModel& model,
                                                    const GuaranteeSpec& spec, int t_target,
                                                    const SensitivityConfig& cfg = {}) {
    const Schedule& sch = spec.schedule;
    detail::require(t_target >= 1 && t_target <= sch.n_periods - 1,
                    "forward_vega_volga: t_target must lie in [1, N-1]");
    auto base_curves = build_weight_curves(model, sch, cfg.grid);
    std::vector<std::vector<double>> grids(base_curves.size());
    for (std::size_t i = 0; i < base_curves.size(); ++i) grids[i] = base_curves[i].strikes;

    const double x0 = spec.initial_capital;
    const double v0 = value_from_weights(model, base_curves[0], x0);
    const double h = cfg.bump;
    WeightGridConfig bumped_cfg = cfg.grid;
    bumped_cfg.validate = false; // bumped kernels shift mass; drifts expected
    const double v_up =
        detail::weights_value_for(model.with_bumped_vol(t_target, +h), sch, x0, bumped_cfg, &grids);
    const double v_dn =
        detail::weights_value_for(model.with_bumped_vol(t_target, -h), sch, x0, bumped_cfg, &grids);
    return {(v_up - v_dn) / (2.0 * h), (v_up - 2.0 * v0 + v_dn) / (h * h)};
}

/// Analytic kernel route for the last forward period: the terminal weight
/// kernel Gamma_{N-1} is replaced by its first/second Sigma derivative and
/// recursed backwards unchanged (no other kernel depends on Sigma_{N-1}).
inline std::pair<double, double> forward_vega_volga_terminal(const BlackScholesModel& model,
                                                             const GuaranteeSpec& spec,
                                                             const SensitivityConfig& cfg = {}) {
    const Schedule& sch = spec.schedule;
    const int n = sch.n_periods;
    detail::require(n >= 2, "forward_vega_volga_terminal: need at least two periods");
    const double w = sch.withdrawal;
    const double dt = sch.dt;
    const double sigma = model.volatility(n - 1);
    const double df = model.period_discount(n - 1, n);

    auto base = build_weight_curves(model, sch, cfg.grid);
    WeightGridConfig raw = cfg.grid;
    raw.validate = false;

    double out[2] = {0.0, 0.0};
    for (int order = 1; order <= 2; ++order) {
        WeightCurve c;
        c.period = n - 2;
        c.strikes = base[static_cast<std::size_t>(n - 2)].strikes;
        c.density.resize(c.strikes.size());
        for (std::size_t i = 0; i < c.strikes.size(); ++i) {
            const double x = c.strikes[i] - w;
            if (x <= 0.0) {
                c.density[i] = 0.0;
                continue;
            }
            c.density[i] = order == 1 ? bs_gamma_dvol(w, x, sigma, dt, df)
                                      : bs_gamma_d2vol(w, x, sigma, dt, df);
        }
        c.finalize();
        for (int t = n - 3; t >= 0; --t)
            c = recurse_weight(model, c, w, raw, &base[static_cast<std::size_t>(t)].strikes);
        out[order - 1] = value_from_weights(model, c, spec.initial_capital);
    }
    return {out[0], out[1]};
}

/// Full forward vega/volga decomposition and the net volga after the
/// variance-swap hedge.
inline VolgaReport net_volga_after_varswap_hedge(const BlackScholesModel& model,
                                                 const GuaranteeSpec& spec,
                                                 const SensitivityConfig& cfg = {}) {
    const Schedule& sch = spec.schedule;
    VolgaReport rep;
    rep.moneyness = spec.moneyness();
    for (int t = 1; t <= sch.n_periods - 1; ++t) {
        auto [vega, volga] = forward_vega_volga(model, spec, t, cfg);
        rep.vega.push_back(vega);
        rep.volga.push_back(volga);
        rep.vega_total += vega;
        rep.volga_total += volga;
        rep.net_volga += vega / model.volatility(t) - volga;
    }
    return rep;
}

} // namespace gmwb
