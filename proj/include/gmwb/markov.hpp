#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gmwb/model.hpp"
#include "gmwb/schedule.hpp"
#include "gmwb/weights.hpp"

namespace gmwb {

struct BoundaryCheck {
    std::string name;
    double value = 0.0;     // measured deviation
    double tolerance = 0.0;
    bool pass = false;
};

struct BoundaryReport {
    int period = 0;
    std::vector<BoundaryCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Value surface V_t(S_t | zeta_{t-1}) stored over the fund value
/// x = zeta S - w on a common grid, one slice per zeta. For x < 0 the value
/// continues linearly as (N-t) w - x, which pins V(0) = (N-t+1) w and
/// V'(0) = -zeta by construction; the stored slice is the alive branch.
class ValueSurface {
public:
    int period = 0;
    int remaining = 0; // N - t
    double w = 0.0;
    std::vector<double> zetas;                // ascending; size 1 in collapsed mode
    std::vector<double> x;                    // uniform fund-value grid starting at 0
    std::vector<std::vector<double>> values;  // values[j][i] at (x_i | zeta_j)

    double x_step() const { return x[1] - x[0]; }

    bool collapsed() const { return zetas.size() == 1; }

    /// Hedge-branch value at arbitrary fund value (>= 0) and zeta.
    double alive_value(double fund_value, double zeta) const {
        return interp_uniform(slice_interp(zeta), 0.0, x_step(), fund_value);
    }

    /// Full V(S | zeta), linear branch included.
    double value_at_spot(double spot, double zeta) const {
        const double fund = zeta * spot - w;
        if (fund <= 0.0) return remaining * w - fund;
        return alive_value(fund, zeta);
    }

    /// d/dS of V at given spot (one-sided at the kink from the right).
    double spot_derivative(double spot, double zeta) const {
        const double fund = zeta * spot - w;
        if (fund < 0.0) return -zeta;
        const double h = x_step();
        const auto s = slice_interp(zeta);
        const double f1 = interp_uniform(s, 0.0, h, std::min(fund + h, x.back()));
        const double f0 = interp_uniform(s, 0.0, h, std::max(fund - h, 0.0));
        const double dx = std::min(fund + h, x.back()) - std::max(fund - h, 0.0);
        return zeta * (f1 - f0) / dx;
    }

    /// Second x-derivative array for one slice: central differences with
    /// one-sided second-order stencils at the edges.
    std::vector<double> second_derivative(std::size_t slice) const {
        const auto& v = values[slice];
        const double h = x_step();
        const std::size_t n = v.size();
        std::vector<double> d2(n);
        for (std::size_t i = 1; i + 1 < n; ++i) d2[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h);
        d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
        d2[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h);
        return d2;
    }

private:
    // interpolate between zeta slices (linear in zeta)
    std::vector<double> slice_interp(double zeta) const {
        if (collapsed() || zeta <= zetas.front()) return values.front();
        if (zeta >= zetas.back()) return values.back();
        std::size_t j = 0;
        while (j + 2 < zetas.size() && zetas[j + 1] < zeta) ++j;
        const double t = (zeta - zetas[j]) / (zetas[j + 1] - zetas[j]);
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (1.0 - t) * values[j][i] + t * values[j + 1][i];
        return out;
    }
};

struct MarkovConfig {
    int x_points = 801;            // forced odd
    double sd_mult = 16.0;         // fund-value grid reach
    int zeta_points = 1;           // 1 => A2-collapsed single slice
    double zeta_top = 0.0;         // top of the zeta grid; 0 => zeta_0 of the spec
    double zeta_min_frac = 1e-3;   // lowest slice as a fraction of the top
    bool verify_steps = true;      // run boundary checks each backward step
    double refine_rel_tol = 1e-3;  // grid doubling until V_0 moves less than this
    int max_refinements = 2;
    double cont_tol_w = 1e-3;      // |W(0) - (N-t) w| <= cont_tol_w * w
    double slope_tol = 1e-3;       // |W'(0+) + 1| <= slope_tol
    double tail_tol_w = 1e-4;      // |W|, |S V'| at the far edge <= tail_tol_w * w
};

struct MarkovResult {
    double v0 = 0.0;
    std::vector<ValueSurface> surfaces;       // index t = 1..N-1 (0 unused)
    std::vector<BoundaryReport> reports;
};

/// Boundary and smoothness conditions for one surface: V and V' continuous at
/// S = w/zeta, V(0) = (N-t+1) w, V'(0) = -zeta, and V -> 0, S V'(S) -> 0 at
/// the far edge.
inline BoundaryReport verify_boundary_conditions(const ValueSurface& s, double w, double zeta,
                                                 const MarkovConfig& cfg = {}) {
    BoundaryReport rep;
    rep.period = s.period;
    std::size_t j = 0;
    for (std::size_t i = 0; i + 1 < s.zetas.size(); ++i)
        if (std::abs(s.zetas[i] - zeta) < std::abs(s.zetas[j] - zeta)) j = i;
    if (!s.zetas.empty() && std::abs(s.zetas.back() - zeta) < std::abs(s.zetas[j] - zeta))
        j = s.zetas.size() - 1;
    const auto& v = s.values[j];
    const double h = s.x_step();
    const double target = s.remaining * w;

    auto add = [&rep](std::string name, double dev, double tol) {
        rep.checks.push_back(BoundaryCheck{std::move(name), dev, tol, std::abs(dev) <= tol});
    };

    // V(0) = (N-t+1) w and V'(0) = -zeta hold on the linear branch by
    // construction; report them as measured through the public accessor.
    add("value at S=0", s.value_at_spot(0.0, zeta) - (target + w), 1e-6 * w);
    add("slope at S=0", s.spot_derivative(0.0, zeta) + zeta, 1e-6 * zeta);
    // continuity of V at w/zeta: alive branch start equals (N-t) w
    add("value continuity at w/zeta", v[0] - target, cfg.cont_tol_w * w);
    // continuity of V': one-sided slope of the alive branch equals -1 in x
    const double slope0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    add("slope continuity at w/zeta", slope0 + 1.0, cfg.slope_tol);
    // far-field decay
    const std::size_t n = v.size();
    add("value decay at far edge", v[n - 1], cfg.tail_tol_w * w);
    const double slope_end = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    add("S V' decay at far edge", (s.x.back() + w) * slope_end, cfg.tail_tol_w * w);
    return rep;
}

namespace detail {

inline void require_boundary_pass(const BoundaryReport& rep, int step) {
    if (rep.all_pass()) return;
    std::string what = "backward_markov_value: boundary verification failed at step " +
                       std::to_string(step) + ":";
    double worst = 0.0;
    for (const auto& c : rep.checks)
        if (!c.pass) {
            what += " [" + c.name + "]";
            worst = std::max(worst, std::abs(c.value));
        }
    throw numerical_error(what, worst);
}

inline double surface_x_max(const OneFactorModel& model, const Schedule& sch, double sd_mult) {
    // reach of the widest hedge density (the t = 0 curve law)
    double mean = sch.withdrawal, var = 0.0;
    for (int t = sch.n_periods - 1; t >= 1; --t) {
        double m2, v2;
        propagate_moments(sch.withdrawal, mean, var, std::exp(model.rate() * model.period_dt()),
                          model.period_return_variance(t), m2, v2);
        mean = m2;
        var = v2;
    }
    return mean + sd_mult * std::sqrt(var);
}

inline MarkovResult markov_pass(const OneFactorModel& model, const GuaranteeSpec& spec,
                                const MarkovConfig& cfg, int x_points) {
    const Schedule& sch = spec.schedule;
    const int n = sch.n_periods;
    const double w = sch.withdrawal;
    detail::require(n >= 2, "backward_markov_value: need at least two periods");
    detail::require(model.satisfies_a1(), "backward_markov_value: model must satisfy (A1)");
    const double zeta0 = cfg.zeta_top > 0.0 ? cfg.zeta_top : spec.initial_capital;

    std::vector<double> zetas;
    if (cfg.zeta_points <= 1) {
        detail::require(model.satisfies_a2(),
                        "backward_markov_value: single-slice mode needs (A2)");
        zetas = {zeta0};
    } else {
        // log-spaced from zeta_min up to zeta0
        const double lo = zeta0 * cfg.zeta_min_frac;
        for (int i = 0; i < cfg.zeta_points; ++i)
            zetas.push_back(lo * std::pow(zeta0 / lo,
                                          static_cast<double>(i) / (cfg.zeta_points - 1)));
        zetas.back() = zeta0;
    }

    const double x_max = surface_x_max(model, sch, cfg.sd_mult);
    const auto x = linspace(0.0, x_max, x_points | 1);

    MarkovResult res;
    res.surfaces.resize(static_cast<std::size_t>(n));

    // terminal surface V_{N-1}: alive branch is zeta' P(w/zeta' | S),
    // which the spec's scaling assumption collapses to P(w | x)
    ValueSurface terminal;
    terminal.period = n - 1;
    terminal.remaining = 1;
    terminal.w = w;
    terminal.zetas = zetas;
    terminal.x = x;
    terminal.values.assign(zetas.size(), std::vector<double>(x.size(), 0.0));
    for (std::size_t jz = 0; jz < zetas.size(); ++jz) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] <= 0.0) {
                terminal.values[jz][i] = model.put(n - 1, w, 0.0);
                continue;
            }
            const double spot = (x[i] + w) / zetas[jz];      // S_{N-1}
            const double zp = zetas[jz] * x[i] / (x[i] + w); // zeta_{N-1}
            terminal.values[jz][i] = zp * model.put(n - 1, w / zp, spot);
        }
    }
    res.surfaces[static_cast<std::size_t>(n - 1)] = std::move(terminal);
    if (cfg.verify_steps) {
        auto rep = verify_boundary_conditions(res.surfaces[static_cast<std::size_t>(n - 1)], w,
                                              zeta0, cfg);
        require_boundary_pass(rep, n - 1);
        res.reports.push_back(std::move(rep));
    }

    // backward steps t = N-2 .. 1, then the scalar V_0
    for (int t = n - 2; t >= 1; --t) {
        const auto& next = res.surfaces[static_cast<std::size_t>(t + 1)];
        ValueSurface cur;
        cur.period = t;
        cur.remaining = n - t;
        cur.w = w;
        cur.zetas = zetas;
        cur.x = x;
        cur.values.assign(zetas.size(), std::vector<double>(x.size(), 0.0));

        std::vector<std::vector<double>> d2(zetas.size());
        for (std::size_t jz = 0; jz < zetas.size(); ++jz) d2[jz] = next.second_derivative(jz);
        const double h = cur.x_step();

        const double df_t = model.period_discount(t, t + 1);
        std::vector<double> f(x.size());
        for (std::size_t jz = 0; jz < zetas.size(); ++jz) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double xi = x[i];
                const double spot = (xi + w) / zetas[jz];
                const double zp = zetas[jz] * xi / (xi + w); // zeta_t after this withdrawal
                // pick the d2 row for zeta' (linear blend between slices,
                // clamped to the grid; pricing always uses the true zeta')
                std::size_t lo = 0;
                double frac = 0.0;
                if (zetas.size() > 1) {
                    const double zc = std::min(std::max(zp, zetas.front()), zetas.back());
                    while (lo + 2 < zetas.size() && zetas[lo + 1] < zc) ++lo;
                    frac = (zc - zetas[lo]) / (zetas[lo + 1] - zetas[lo]);
                }
                for (std::size_t k = 0; k < x.size(); ++k) {
                    const double dd = zetas.size() > 1
                                          ? (1.0 - frac) * d2[lo][k] + frac * d2[lo + 1][k]
                                          : d2[0][k];
                    double put;
                    if (xi <= 0.0) {
                        // deep-in-the-money limit: zeta' P((x+w)/zeta'|S) -> df (x+w) - x_i
                        put = df_t * (x[k] + w);
                    } else {
                        put = model.put(t, (x[k] + w) / zp, spot) * zp;
                    }
                    f[k] = put * dd;
                }
                cur.values[jz][i] = simpson(f, h);
            }
        }
        if (cfg.verify_steps) {
            auto rep = verify_boundary_conditions(cur, w, zeta0, cfg);
            require_boundary_pass(rep, t);
            res.reports.push_back(std::move(rep));
        }
        res.surfaces[static_cast<std::size_t>(t)] = std::move(cur);
    }

    // V_0 from the t = 1 surface at zeta_0 (spot S_0 = 1)
    {
        const auto& s1 = res.surfaces[1];
        std::size_t jz = 0;
        for (std::size_t i = 0; i < zetas.size(); ++i)
            if (std::abs(zetas[i] - zeta0) < std::abs(zetas[jz] - zeta0)) jz = i;
        auto d2 = s1.second_derivative(jz);
        std::vector<double> f(x.size());
        for (std::size_t k = 0; k < x.size(); ++k)
            f[k] = model.put(0, (x[k] + w) / zeta0, 1.0) * zeta0 * d2[k];
        res.v0 = simpson(f, s1.x_step());
    }
    return res;
}

} // namespace detail

/// Backward value-surface recursion for one-factor Markov models: numerical
/// second spot-derivatives of V_{t+1} integrated against period-t puts.
/// The grid doubles until V_0 moves less than refine_rel_tol.
inline MarkovResult backward_markov_value(const OneFactorModel& model, const GuaranteeSpec& spec,
                                          const MarkovConfig& cfg = {}) {
    int pts = cfg.x_points | 1;
    MarkovResult res = detail::markov_pass(model, spec, cfg, pts);
    for (int r = 0; r < cfg.max_refinements; ++r) {
        pts = pts * 2 - 1;
        MarkovResult fine = detail::markov_pass(model, spec, cfg, pts);
        const double rel = std::abs(fine.v0 - res.v0) / std::max(std::abs(fine.v0), 1e-12);
        res = std::move(fine);
        if (rel < cfg.refine_rel_tol) break;
    }
    return res;
}

} // namespace gmwb
