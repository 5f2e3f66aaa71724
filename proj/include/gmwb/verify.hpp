#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gmwb/adjoint.hpp"
#include "gmwb/markov.hpp"
#include "gmwb/mc.hpp"
#include "gmwb/model.hpp"
#include "gmwb/rng.hpp"
#include "gmwb/schedule.hpp"
#include "gmwb/weights.hpp"

namespace gmwb {

struct CheckItem {
    std::string suite;
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<CheckItem> items;

    bool all_pass() const {
        for (const auto& i : items)
            if (!i.pass) return false;
        return true;
    }

    void add(std::string suite, std::string name, double dev, double tol) {
        items.push_back(
            CheckItem{std::move(suite), std::move(name), dev, tol, std::abs(dev) <= tol});
    }

    void absorb(const std::string& suite, const KernelReport& rep) {
        for (const auto& c : rep.checks)
            items.push_back(CheckItem{suite, c.name, c.deviation, c.tolerance, c.pass});
    }

    void absorb(const std::string& suite, const BoundaryReport& rep) {
        for (const auto& c : rep.checks)
            items.push_back(CheckItem{suite, c.name + " (t=" + std::to_string(rep.period) + ")",
                                      c.value, c.tolerance, c.pass});
    }
};

/// Model-level identities: parity, scaling, density normalization and
/// martingale property, strike-derivative consistency.
inline VerifyReport verify_model(const OneFactorModel& m) {
    VerifyReport rep;
    const std::string suite = "model";
    const int t = 0;
    const double df = m.period_discount(t, t + 1);
    for (double k : {8.0, 12.0}) {
        const double parity = m.call(t, k, 10.0) - m.put(t, k, 10.0) - (10.0 - k * df);
        rep.add(suite, "put-call parity (K=" + std::to_string(k) + ")", parity, 1e-7);
    }
    if (m.satisfies_a2()) {
        SplitMix64 rng = path_stream(7, 0);
        double worst = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double alpha = 0.5 + 1.5 * rng.uniform();
            const double base = m.put(t, 11.0, 9.0);
            worst = std::max(worst,
                             std::abs(m.put(t, alpha * 11.0, alpha * 9.0) - alpha * base) /
                                 std::max(alpha * base, 1e-300));
        }
        rep.add(suite, "scaling property (A2)", worst, 1e-9);
    }
    const auto& tbl = m.distribution(t);
    rep.add(suite, "density normalization", tbl.mass() - 1.0, 1e-5);
    rep.add(suite, "density martingale", tbl.mean_exp() - std::exp(m.rate() * m.period_dt()),
            1e-5);
    // d2strike_put against a central difference of dstrike_put
    const double h = 1e-4;
    const double fd =
        (m.dstrike_put(t, 10.0 + h, 9.0) - m.dstrike_put(t, 10.0 - h, 9.0)) / (2.0 * h);
    rep.add(suite, "strike second derivative",
            (m.d2strike_put(t, 10.0, 9.0) - fd) / std::max(std::abs(fd), 1e-12), 1e-5);
    return rep;
}

/// Weight-curve laws: unit mass, additive mean, widening variance.
inline VerifyReport verify_weight_laws(const OneFactorModel& m, const Schedule& sch,
                                       const WeightGridConfig& cfg = {}) {
    VerifyReport rep;
    const std::string suite = "weights";
    auto curves = build_weight_curves(m, sch, cfg);
    double prev_var = -1.0;
    for (int t = sch.n_periods - 1; t >= 0; --t) {
        const auto& g = curves[static_cast<std::size_t>(t)];
        rep.add(suite, "mass (t=" + std::to_string(t) + ")", g.mass() - 1.0, 1e-6);
        const double target = (sch.n_periods - t) * sch.withdrawal;
        rep.add(suite, "mean (t=" + std::to_string(t) + ")", (g.mean() - target) / target, 1e-4);
        rep.add(suite, "variance widens (t=" + std::to_string(t) + ")",
                g.variance() > prev_var ? 0.0 : 1.0, 0.5);
        prev_var = g.variance();
    }
    return rep;
}

/// Replication identity on a spot grid: the expired ladder finances the
/// claim plus the next ladder.
inline VerifyReport verify_replication(const OneFactorModel& m, const Schedule& sch,
                                       int n_spots = 50, const WeightGridConfig& cfg = {}) {
    VerifyReport rep;
    const std::string suite = "replication";
    const double w = sch.withdrawal;
    auto curves = build_weight_curves(m, sch, cfg);
    for (int t = 1; t <= sch.n_periods - 1; ++t) {
        const auto& expiring = curves[static_cast<std::size_t>(t - 1)];
        const auto& next = curves[static_cast<std::size_t>(t)];
        const double m_t = next.mean();
        const double zeta = 1.0;
        double worst = 0.0;
        for (int i = 0; i < n_spots; ++i) {
            const double spot = 0.2 * w + (2.8 * w - 0.2 * w) * i / (n_spots - 1);
            const double x = zeta * spot - w;
            const double lhs = expired_portfolio_value(expiring, zeta, spot);
            double rhs = std::max(-x, 0.0);
            rhs += (x > 0.0) ? value_from_weights(m, next, x) : m_t;
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        rep.add(suite, "expired ladder finances claims (t=" + std::to_string(t) + ")", worst,
                1e-4 * w);
    }
    return rep;
}

inline double sup_density_gap(const OneFactorModel& a, const OneFactorModel& b) {
    double sup = 0.0;
    for (int t = 0; t < a.n_periods(); ++t) {
        const auto [lo, hi] = a.log_return_support(t);
        for (int i = 0; i <= 128; ++i) {
            const double xi = lo + (hi - lo) * i / 128.0;
            sup = std::max(sup,
                           std::abs(a.log_return_density(t, xi) - b.log_return_density(t, xi)));
        }
    }
    return sup;
}

/// Lemma-style checks: gamma transition kernels, adjoint normalization and
/// martingale, skew reversal where the model is skewed.
inline VerifyReport verify_adjoint_suite(std::shared_ptr<const OneFactorModel> model) {
    VerifyReport rep;
    rep.absorb("kernels", gamma_kernel_checks(*model));
    auto adj = build_adjoint(model);
    rep.absorb("adjoint", adjoint_checks(*adj));
    const double skew_base = model->distribution(0).central_moment(3);
    const double skew_adj = adj->distribution(0).central_moment(3);
    const double scale = std::pow(model->distribution(0).central_moment(2), 1.5);
    if (std::abs(skew_base) > 1e-3 * scale)
        rep.add("adjoint", "skew reversal", skew_base * skew_adj < 0.0 ? 0.0 : 1.0, 0.5);
    else
        rep.add("adjoint", "self-adjoint density", sup_density_gap(*model, *adj), 1e-8);
    return rep;
}

/// Boundary conditions of the Markov surface recursion at every step.
inline VerifyReport verify_boundaries(const OneFactorModel& m, const GuaranteeSpec& spec,
                                      MarkovConfig cfg = {}) {
    VerifyReport rep;
    cfg.verify_steps = true;
    cfg.max_refinements = 0;
    auto res = backward_markov_value(m, spec, cfg);
    for (const auto& r : res.reports) rep.absorb("boundary", r);
    return rep;
}

} // namespace gmwb
