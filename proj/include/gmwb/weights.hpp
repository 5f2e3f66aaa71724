#pragma once

#include <cmath>
#include <vector>

#include "gmwb/model.hpp"
#include "gmwb/schedule.hpp"
#include "gmwb/weight_curve.hpp"

namespace gmwb {

struct WeightGridConfig {
    int strike_points = 2001;      // per curve; forced odd
    double sd_mult = 16.0;         // grid reach beyond the mean
    bool renormalize_mass = false; // strict mode: rescale mass only, keep shape
    double drift_hard_limit = 1e-3;
    double tail_tolerance = 1e-5;  // terminal-curve truncation guard
    bool validate = true;          // off for signed (sensitivity) curves
};

namespace detail {

/// Kernel-vs-curve integral  int Gamma_p(k'|x) c(k') dk'  evaluated after the
/// substitution k' = x e^xi, i.e. as  df int e^{2 xi} q_p(xi) c(x e^xi) dxi
/// on the period's tabulated log-return grid. The substitution pins the
/// density's center (and any cusp) to fixed grid nodes for every x.
class KernelApplier {
public:
    KernelApplier(const OneFactorModel& m, int period)
        : model_(m), period_(period), tbl_(m.distribution(period)),
          df_(m.period_discount(period, period + 1)) {
        const int n = tbl_.size();
        weights_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double xi = tbl_.point(i);
            double simpson_w;
            if (i == 0 || i == n - 1) simpson_w = 1.0;
            else simpson_w = (i % 2 == 1) ? 4.0 : 2.0;
            weights_[static_cast<std::size_t>(i)] =
                df_ * simpson_w * tbl_.h / 3.0 * std::exp(2.0 * xi) *
                tbl_.q[static_cast<std::size_t>(i)];
        }
    }

    /// clip: integrate only over k' in [clip_lo, clip_hi] (curve support by
    /// default).
    double operator()(const WeightCurve& curve, double x, double clip_lo = -1.0,
                      double clip_hi = -1.0) const {
        if (x <= 0.0) return 0.0;
        double acc = 0.0;
        if (curve.has_grid()) {
            const double lo = clip_lo >= 0.0 ? std::max(clip_lo, curve.strikes.front())
                                             : curve.strikes.front();
            const double hi = clip_hi >= 0.0 ? std::min(clip_hi, curve.strikes.back())
                                             : curve.strikes.back();
            const double gs = curve.grid_step();
            const double front = curve.strikes.front();
            const int n = tbl_.size();
            for (int i = 0; i < n; ++i) {
                const double kp = x * std::exp(tbl_.point(i));
                if (kp < lo || kp > hi) continue;
                const double g = interp_uniform(curve.density, front, gs, kp);
                acc += weights_[static_cast<std::size_t>(i)] * g;
            }
        }
        if (curve.atom) {
            const double l = curve.atom->location;
            const bool in = (clip_lo < 0.0 || l >= clip_lo) && (clip_hi < 0.0 || l <= clip_hi);
            if (in) acc += curve.atom->mass * model_.gamma(period_, l, x);
        }
        return acc;
    }

private:
    const OneFactorModel& model_;
    int period_;
    const DistributionTable& tbl_;
    double df_;
    std::vector<double> weights_;
};

// grid bound for the next backward curve: mean and variance of w + Y R
inline void propagate_moments(double w, double mean_in, double var_in, double r_mean,
                              double r_var, double& mean_out, double& var_out) {
    mean_out = w + mean_in * r_mean;
    var_out = var_in * (r_var + r_mean * r_mean) + mean_in * mean_in * r_var;
}

} // namespace detail

/// Terminal weight function g_{N-2}(k) = Gamma_{N-1}(w | k - w).
inline WeightCurve terminal_weight(const OneFactorModel& model, const Schedule& schedule,
                                   const WeightGridConfig& cfg = {},
                                   const std::vector<double>* grid_override = nullptr) {
    const int n = schedule.n_periods;
    detail::require(n >= 2, "terminal_weight: need at least two periods");
    const double w = schedule.withdrawal;
    const int period = n - 2;
    const int kernel_period = n - 1;

    WeightCurve c;
    c.period = period;
    if (grid_override) {
        c.strikes = *grid_override;
    } else {
        double mean_out, var_out;
        detail::propagate_moments(w, w, 0.0, std::exp(model.rate() * model.period_dt()),
                                  model.period_return_variance(kernel_period), mean_out, var_out);
        int pts = cfg.strike_points | 1;
        c.strikes = linspace(w, w + mean_out + cfg.sd_mult * std::sqrt(var_out), pts);
    }
    c.density.resize(c.strikes.size());
    for (std::size_t i = 0; i < c.strikes.size(); ++i) {
        const double x = c.strikes[i] - w;
        c.density[i] = x <= 0.0 ? 0.0 : model.gamma(kernel_period, w, x);
    }
    c.finalize();

    if (cfg.validate) {
        // Gamma kernels have unit mass and spot-first-moment df*K at any
        // flat rate, so the curve mass is exactly 1 and the first moment
        // w (1 + df).
        const double df = model.period_discount(kernel_period, kernel_period + 1);
        const double tail = std::abs(1.0 - c.mass());
        if (tail > cfg.tail_tolerance)
            throw numerical_error("terminal_weight: grid truncation leaves tail mass", tail);
        c.mass_drift = c.mass() - 1.0;
        c.mean_drift = c.first_moment() - w * (1.0 + df);
        if (cfg.renormalize_mass && c.mass() > 0.0) {
            const double scale = 1.0 / c.mass();
            for (double& g : c.density) g *= scale;
            c.finalize();
        }
    }
    return c;
}

/// One backward step g_t(k) = int Gamma_{t+1}(k'|k-w) g_{t+1}(k') dk'.
inline WeightCurve recurse_weight(const OneFactorModel& model, const WeightCurve& g_next,
                                  double w, const WeightGridConfig& cfg = {},
                                  const std::vector<double>* grid_override = nullptr) {
    detail::require(g_next.period >= 1, "recurse_weight: cannot step below period 0");
    const int kernel_period = g_next.period;
    detail::KernelApplier kernel(model, kernel_period);

    WeightCurve c;
    c.period = g_next.period - 1;
    if (grid_override) {
        c.strikes = *grid_override;
    } else {
        const double mass_in = cfg.validate ? g_next.mass() : 1.0;
        const double mean_in = g_next.first_moment() / std::max(mass_in, 1e-12);
        const double var_in = g_next.has_grid() || g_next.atom ? g_next.variance() : 0.0;
        double mean_out, var_out;
        detail::propagate_moments(w, mean_in, var_in, std::exp(model.rate() * model.period_dt()),
                                  model.period_return_variance(kernel_period), mean_out, var_out);
        int pts = cfg.strike_points | 1;
        c.strikes = linspace(w, w + mean_out + cfg.sd_mult * std::sqrt(var_out), pts);
    }
    c.density.resize(c.strikes.size());
    for (std::size_t i = 0; i < c.strikes.size(); ++i) {
        const double x = c.strikes[i] - w;
        c.density[i] = x <= 0.0 ? 0.0 : kernel(g_next, x);
    }
    c.finalize();

    if (cfg.validate) {
        const double df = model.period_discount(kernel_period, kernel_period + 1);
        const double expected_mass = g_next.mass();
        const double expected_first = w * g_next.mass() + df * g_next.first_moment();
        c.mass_drift = c.mass() - expected_mass;
        c.mean_drift = c.first_moment() - expected_first;
        if (std::abs(c.mass_drift) > cfg.drift_hard_limit)
            throw numerical_error("recurse_weight: mass drift beyond hard limit",
                                  std::abs(c.mass_drift));
        if (cfg.renormalize_mass && c.mass() > 0.0) {
            const double scale = expected_mass / c.mass();
            for (double& g : c.density) g *= scale;
            if (c.atom) c.atom->mass *= scale;
            c.finalize();
        }
    }
    return c;
}

/// All weight curves g_0..g_{N-1}, built backwards from the terminal atom
/// g_{N-1} = delta_w. Optional grid templates pin the strike grids (used by
/// bump-and-revalue sensitivities).
inline std::vector<WeightCurve> build_weight_curves(
    const OneFactorModel& model, const Schedule& schedule, const WeightGridConfig& cfg = {},
    const std::vector<std::vector<double>>* grid_templates = nullptr) {
    const int n = schedule.n_periods;
    detail::require(model.n_periods() >= n, "build_weight_curves: model has too few periods");
    std::vector<WeightCurve> curves(static_cast<std::size_t>(n));
    curves[static_cast<std::size_t>(n - 1)] = WeightCurve::dirac(n - 1, schedule.withdrawal);
    if (n == 1) return curves;
    auto grid_for = [&](int t) -> const std::vector<double>* {
        if (!grid_templates) return nullptr;
        return &(*grid_templates)[static_cast<std::size_t>(t)];
    };
    curves[static_cast<std::size_t>(n - 2)] =
        terminal_weight(model, schedule, cfg, grid_for(n - 2));
    for (int t = n - 3; t >= 0; --t)
        curves[static_cast<std::size_t>(t)] = recurse_weight(
            model, curves[static_cast<std::size_t>(t + 1)], schedule.withdrawal, cfg, grid_for(t));
    return curves;
}

/// Hedge-portfolio value V_t = int g_t(k) P_t(k | X_t) dk for a live fund.
inline double value_from_weights(const OneFactorModel& model, const WeightCurve& g,
                                 double fund_value) {
    detail::require(fund_value > 0.0, "value_from_weights: fund_value must be > 0");
    double acc = 0.0;
    if (g.has_grid()) {
        std::vector<double> f(g.density.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = g.density[i] * model.put(g.period, g.strikes[i], fund_value);
        acc = simpson(f, g.grid_step());
    }
    if (g.atom) acc += g.atom->mass * model.put(g.period, g.atom->location, fund_value);
    return acc;
}

/// Payout of an expired strike ladder, int g(k) (k - zeta_prev * spot)^+ dk.
/// The kink is handled through the curve's cached partial moments.
inline double expired_portfolio_value(const WeightCurve& g, double zeta_prev, double spot) {
    const double a = zeta_prev * spot;
    if (a <= 0.0) return g.first_moment();
    return g.tail_first_moment(a) - a * g.tail_mass(a);
}

} // namespace gmwb
