#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gmwb/mc.hpp"
#include "gmwb/model.hpp"
#include "gmwb/rng.hpp"
#include "gmwb/weights.hpp"

namespace gmwb {

/// Reverse Gamma-adjoint of an (A2) model: per-period log-return densities
///   q~_t(xi) = e^{-xi} q_{N-1-t}(-xi),
/// i.e. the transition kernels are the gamma functions of vanilla options on
/// the base process in time-reversed order. At a non-zero flat rate the
/// density additionally carries the period discount factor; that regime is
/// marked experimental.
class AdjointModel final : public LevyModel {
public:
    explicit AdjointModel(std::shared_ptr<const OneFactorModel> base, int table_points = 4097)
        : LevyModel(base->n_periods(), base->period_dt(), base->rate(), table_points),
          base_(std::move(base)) {
        detail::require(base_->satisfies_a2(), "AdjointModel: base model must satisfy (A2)");
        experimental_ = rate() != 0.0;
        init_tables();
    }

    bool experimental_rates() const { return experimental_; }

    double log_return_density(int t, double xi) const override {
        return log_return_density_span(t, t + 1, xi);
    }

    // Adjoint span (t, t') maps to the base span (N-t', N-t).
    double log_return_density_span(int t0, int t1, double xi) const override {
        const int n = n_periods_;
        detail::require(t0 >= 0 && t1 <= n && t0 < t1, "AdjointModel: bad span");
        const double df = base_->period_discount(t0, t1);
        return df * std::exp(-xi) * base_->log_return_density_span(n - t1, n - t0, -xi);
    }

    std::pair<double, double> log_return_support(int t) const override {
        return log_return_support_span(t, t + 1);
    }

    std::pair<double, double> log_return_support_span(int t0, int t1) const override {
        const int n = n_periods_;
        const auto [blo, bhi] = base_->log_return_support_span(n - t1, n - t0);
        const double pad = 0.05 * (bhi - blo);
        return {-bhi - pad, -blo + pad};
    }

protected:
    double table_martingale_target(int) const override {
        return std::exp(-rate() * period_dt());
    }

private:
    std::shared_ptr<const OneFactorModel> base_;
    bool experimental_ = false;
};

inline std::shared_ptr<AdjointModel> build_adjoint(std::shared_ptr<const OneFactorModel> base,
                                                   int table_points = 4097) {
    return std::make_shared<AdjointModel>(std::move(base), table_points);
}

struct KernelCheck {
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct KernelReport {
    std::vector<KernelCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Gamma terms define probability transition kernels: unit mass, first
/// moment K, and the Chapman-Kolmogorov composition across two periods.
inline KernelReport gamma_kernel_checks(const OneFactorModel& model, double tolerance = 1e-4) {
    KernelReport rep;
    auto add = [&rep](std::string name, double dev, double tol) {
        rep.checks.push_back(KernelCheck{std::move(name), dev, tol, std::abs(dev) <= tol});
    };

    const int n = model.n_periods();
    for (int t : {0, n - 1}) {
        for (double strike : {8.0, 15.0}) {
            const auto [lo, hi] = model.log_return_support(t);
            const double s_lo = strike * std::exp(-hi);
            const double s_hi = strike * std::exp(-lo);
            const int pts = 8001;
            const double h = (s_hi - s_lo) / (pts - 1);
            std::vector<double> f0(pts), f1(pts);
            for (int i = 0; i < pts; ++i) {
                const double s = s_lo + h * i;
                const double g = model.gamma(t, strike, s);
                f0[static_cast<std::size_t>(i)] = g;
                f1[static_cast<std::size_t>(i)] = s * g;
            }
            const std::string tag = " (t=" + std::to_string(t) + ", K=" + std::to_string(strike) + ")";
            add("kernel mass" + tag, simpson(f0, h) - 1.0, tolerance);
            add("kernel first moment" + tag, simpson(f1, h) / strike - 1.0, tolerance);
        }
    }

    // Chapman-Kolmogorov: compose periods 0 and 1 against the direct span
    if (n >= 2) {
        for (double k : {9.0, 12.0})
            for (double kp : {10.0, 14.0}) {
                const auto [lo, hi] = model.log_return_support(1);
                const double m_lo = k * std::exp(-hi), m_hi = k * std::exp(-lo);
                const int pts = 4001;
                const double h = (m_hi - m_lo) / (pts - 1);
                std::vector<double> f(pts);
                for (int i = 0; i < pts; ++i) {
                    const double m = m_lo + h * i;
                    f[static_cast<std::size_t>(i)] =
                        model.gamma(1, k, m) * model.gamma(0, m, kp);
                }
                const double composed = simpson(f, h);
                const double direct = model.gamma_span(0, 2, k, kp);
                add("Chapman-Kolmogorov (k=" + std::to_string(k) + ", k'=" + std::to_string(kp) +
                        ")",
                    (composed - direct) / std::max(std::abs(direct), 1e-12), tolerance);
            }
    }

    return rep;
}

/// Normalization and martingale identities of the adjoint densities,
/// int q~ = 1 and int e^xi q~ = 1 per period (zero-rate base regime).
inline KernelReport adjoint_checks(const AdjointModel& adjoint, double tolerance = 1e-5) {
    KernelReport rep;
    for (int t = 0; t < adjoint.n_periods(); ++t) {
        const auto& tbl = adjoint.distribution(t);
        rep.checks.push_back(KernelCheck{"adjoint mass (t=" + std::to_string(t) + ")",
                                         tbl.mass() - 1.0, tolerance,
                                         std::abs(tbl.mass() - 1.0) <= tolerance});
        const double target = std::exp(-adjoint.rate() * adjoint.period_dt());
        rep.checks.push_back(KernelCheck{"adjoint martingale (t=" + std::to_string(t) + ")",
                                         tbl.mean_exp() - target, tolerance,
                                         std::abs(tbl.mean_exp() - target) <= tolerance});
    }
    return rep;
}

/// Empirical distribution of the adjoint multi-contribution fund Y_t.
struct EmpiricalFundDistribution {
    std::vector<double> samples;
    int n_steps = 0;
    std::uint64_t seed = 0;

    double mean() const {
        double s = 0.0;
        for (double y : samples) s += y;
        return s / static_cast<double>(samples.size());
    }

    double std_error() const {
        const double m = mean();
        double acc = 0.0;
        for (double y : samples) acc += (y - m) * (y - m);
        return std::sqrt(acc / static_cast<double>(samples.size()) /
                         static_cast<double>(samples.size()));
    }
};

/// Forward sampler of Y_{t+1} = Y_t S~_{t+1}/S~_t + w, Y_0 = w.
inline EmpiricalFundDistribution sample_adjoint_fund(const AdjointModel& adjoint, double w,
                                                     int n_steps, const MCConfig& mc) {
    detail::require(w > 0.0, "sample_adjoint_fund: w must be > 0");
    detail::require(n_steps >= 0 && n_steps <= adjoint.n_periods() - 1,
                    "sample_adjoint_fund: n_steps must lie in [0, N-1]");
    detail::validate_mc(mc);
    EmpiricalFundDistribution out;
    out.n_steps = n_steps;
    out.seed = mc.seed;
    out.samples.reserve(static_cast<std::size_t>(mc.n_paths));
    const std::int64_t n_base = mc.antithetic ? mc.n_paths / 2 : mc.n_paths;
    for (std::int64_t i = 0; i < n_base; ++i) {
        auto rng = path_stream(mc.seed, static_cast<std::uint64_t>(i));
        double y = w, ya = w;
        for (int t = 0; t < n_steps; ++t) {
            const double u = rng.uniform();
            y = y * std::exp(adjoint.sample_log_return(t, u)) + w;
            if (mc.antithetic) ya = ya * std::exp(adjoint.sample_log_return(t, 1.0 - u)) + w;
        }
        out.samples.push_back(y);
        if (mc.antithetic) out.samples.push_back(ya);
    }
    return out;
}

/// Dual pricing of the withdrawal guarantee:
/// V_t = E[ P_t(Y_{N-t-1} | X_t) ] over adjoint multi-contribution samples.
inline PricingResult price_via_adjoint(const OneFactorModel& model, const AdjointModel& adjoint,
                                       const Schedule& schedule, double fund_value, int t,
                                       const MCConfig& mc) {
    detail::require(fund_value > 0.0, "price_via_adjoint: fund value must be > 0");
    const int n = schedule.n_periods;
    detail::require(t >= 0 && t < n, "price_via_adjoint: bad period");
    detail::require(model.n_periods() >= n && adjoint.n_periods() >= n,
                    "price_via_adjoint: model has too few periods");
    auto dist = sample_adjoint_fund(adjoint, schedule.withdrawal, n - t - 1, mc);
    PricingResult res;
    res.seed = mc.seed;
    res.n_paths = static_cast<std::int64_t>(dist.samples.size());
    double sum = 0.0, sumsq = 0.0;
    if (mc.antithetic) {
        for (std::size_t i = 0; i + 1 < dist.samples.size(); i += 2) {
            const double v = 0.5 * (model.put(t, dist.samples[i], fund_value) +
                                    model.put(t, dist.samples[i + 1], fund_value));
            sum += v;
            sumsq += v * v;
        }
        const double np = static_cast<double>(dist.samples.size() / 2);
        res.value = sum / np;
        res.std_error = std::sqrt(std::max(0.0, sumsq / np - res.value * res.value) / np);
    } else {
        for (double y : dist.samples) {
            const double v = model.put(t, y, fund_value);
            sum += v;
            sumsq += v * v;
        }
        const double np = static_cast<double>(dist.samples.size());
        res.value = sum / np;
        res.std_error = std::sqrt(std::max(0.0, sumsq / np - res.value * res.value) / np);
    }
    return res;
}

/// Bucketed density of adjoint fund samples in the weight-curve format.
inline WeightCurve empirical_weight_from_adjoint(const EmpiricalFundDistribution& dist,
                                                 int n_buckets = 50, int period = 0) {
    detail::require(dist.samples.size() >= 100,
                    "empirical_weight_from_adjoint: too few samples");
    detail::require(n_buckets >= 3, "empirical_weight_from_adjoint: need at least 3 buckets");
    double lo = dist.samples.front(), hi = lo;
    for (double y : dist.samples) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    WeightCurve c;
    c.period = period;
    if (hi - lo < 1e-9 * std::max(1.0, std::abs(hi))) {
        // degenerate distribution (t = N-1): all mass at one point
        return WeightCurve::dirac(period, 0.5 * (lo + hi));
    }
    const double width = (hi - lo) / n_buckets;
    std::vector<double> counts(static_cast<std::size_t>(n_buckets), 0.0);
    for (double y : dist.samples) {
        int b = static_cast<int>((y - lo) / width);
        if (b < 0) b = 0;
        if (b >= n_buckets) b = n_buckets - 1;
        counts[static_cast<std::size_t>(b)] += 1.0;
    }
    const double norm = static_cast<double>(dist.samples.size()) * width;
    c.strikes.resize(static_cast<std::size_t>(n_buckets));
    c.density.resize(static_cast<std::size_t>(n_buckets));
    for (int b = 0; b < n_buckets; ++b) {
        c.strikes[static_cast<std::size_t>(b)] = lo + (b + 0.5) * width;
        c.density[static_cast<std::size_t>(b)] = counts[static_cast<std::size_t>(b)] / norm;
    }
    c.finalize();
    // make the curve's own quadrature carry unit mass
    const double scale = 1.0 / c.mass();
    for (double& g : c.density) g *= scale;
    c.finalize();
    return c;
}

/// Kolmogorov-Smirnov distance between fund samples and a quadrature curve.
inline double ks_distance(std::vector<double> samples, const WeightCurve& curve) {
    detail::require(!samples.empty(), "ks_distance: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    const double total = curve.mass();
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = curve.cdf(samples[i]) / total;
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    }
    return d;
}

/// Backward weight functions for a put on a multi-contribution fund:
/// g~_{N-1} = delta_K, g~_t(k) = int Gamma_{t+1}(k'|k+p) g~_{t+1}(k') dk'
/// on fund-value grids [0, k_max]; mass below one is the depleted share of
/// the dual withdrawal fund.
inline std::vector<WeightCurve> contribution_put_weight_curves(const OneFactorModel& model,
                                                               double p, double strike,
                                                               const WeightGridConfig& cfg = {}) {
    detail::require(p > 0.0, "contribution_put_weight_curves: p must be > 0");
    detail::require(strike > 0.0, "contribution_put_weight_curves: strike must be > 0");
    const int n = model.n_periods();
    std::vector<WeightCurve> curves(static_cast<std::size_t>(n));
    curves[static_cast<std::size_t>(n - 1)] = WeightCurve::dirac(n - 1, strike);

    // grid reach from the dual withdrawal-fund moments (X_0 = strike,
    // withdrawals p): track mean and raw second moment
    double mean = strike, m2 = strike * strike;
    for (int t = n - 2; t >= 0; --t) {
        const int kernel_period = t + 1;
        const double r_mean = std::exp(model.rate() * model.period_dt());
        const double r_m2 = model.period_return_variance(kernel_period) + r_mean * r_mean;
        const double m2_next = m2 * r_m2 - 2.0 * p * mean * r_mean + p * p;
        const double mean_next = mean * r_mean - p;
        mean = mean_next;
        m2 = std::max(m2_next, mean * mean);
        const double sd = std::sqrt(std::max(0.0, m2 - mean * mean));
        const double k_hi = std::max({strike, mean, 0.0}) + cfg.sd_mult * sd + p;

        detail::KernelApplier kernel(model, kernel_period);
        const auto& next = curves[static_cast<std::size_t>(t + 1)];
        WeightCurve c;
        c.period = t;
        c.strikes = linspace(0.0, k_hi, cfg.strike_points | 1);
        c.density.resize(c.strikes.size());
        for (std::size_t i = 0; i < c.strikes.size(); ++i)
            c.density[i] = kernel(next, c.strikes[i] + p);
        c.finalize();
        curves[static_cast<std::size_t>(t)] = std::move(c);
    }
    return curves;
}

/// Three-route pricing of the put paying (K - Y_{N-})^+ on the
/// multi-contribution fund driven by the given model.
struct DualPutResult {
    double weights_value = 0.0;  // backward recursion + quadrature
    PricingResult adjoint_mc;    // E[P_0(X_{N-1}|p)] with X under the adjoint
    PricingResult direct_mc;     // payoff simulation on Y
};

inline DualPutResult price_put_on_contribution_fund(std::shared_ptr<const OneFactorModel> model,
                                                    double p, double strike, const MCConfig& mc,
                                                    const WeightGridConfig& cfg = {}) {
    detail::require(strike > 0.0, "price_put_on_contribution_fund: strike must be > 0");
    const int n = model->n_periods();
    DualPutResult out;

    auto curves = contribution_put_weight_curves(*model, p, strike, cfg);
    out.weights_value = value_from_weights(*model, curves[0], p);

    // dual route: withdrawal fund on the reverse adjoint, X_0 = K
    auto adj = build_adjoint(model);
    detail::validate_mc(mc);
    const std::int64_t n_base = mc.antithetic ? mc.n_paths / 2 : mc.n_paths;
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < n_base; ++i) {
        auto rng = path_stream(mc.seed, static_cast<std::uint64_t>(i));
        double x = strike, xa = strike;
        for (int t = 0; t < n - 1; ++t) {
            const double u = rng.uniform();
            x = x * std::exp(adj->sample_log_return(t, u)) - p;
            if (mc.antithetic) xa = xa * std::exp(adj->sample_log_return(t, 1.0 - u)) - p;
        }
        double v = model->put(0, x, p);
        if (mc.antithetic) v = 0.5 * (v + model->put(0, xa, p));
        sum += v;
        sumsq += v * v;
    }
    const double np = static_cast<double>(n_base);
    out.adjoint_mc.value = sum / np;
    out.adjoint_mc.std_error =
        std::sqrt(std::max(0.0, sumsq / np - out.adjoint_mc.value * out.adjoint_mc.value) / np);
    out.adjoint_mc.n_paths = mc.n_paths;
    out.adjoint_mc.seed = mc.seed;

    out.direct_mc = mc_put_on_contribution_fund(*model, p, strike, n, mc);
    return out;
}

} // namespace gmwb
