#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "gmwb/common.hpp"
#include "gmwb/quadrature.hpp"

namespace gmwb {

/// Tabulated one-period log-return distribution on a uniform grid:
/// density q, CDF f0 and the partial exponential moment f1 = int e^xi q.
/// Prefix integrals use per-cell Simpson with midpoint evaluations; values
/// between nodes come from cubic Hermite interpolation with q as the exact
/// derivative of f0 (and e^xi q of f1).
class DistributionTable {
public:
    double lo = 0, hi = 0, h = 0;
    std::vector<double> q;  // density at nodes
    std::vector<double> eq; // e^xi * density at nodes
    std::vector<double> f0; // prefix integral of q
    std::vector<double> f1; // prefix integral of e^xi q

    DistributionTable() = default;

    template <class Density>
    DistributionTable(const Density& density, double lo_, double hi_, int n_points) {
        detail::require(n_points >= 33, "DistributionTable: too few points");
        if (n_points % 2 == 0) ++n_points;
        detail::require(hi_ > lo_, "DistributionTable: empty support");
        lo = lo_;
        hi = hi_;
        h = (hi - lo) / (n_points - 1);
        q.resize(static_cast<std::size_t>(n_points));
        eq.resize(q.size());
        f0.resize(q.size());
        f1.resize(q.size());
        for (int i = 0; i < n_points; ++i) {
            const double x = lo + h * i;
            q[static_cast<std::size_t>(i)] = std::max(0.0, density(x));
            eq[static_cast<std::size_t>(i)] = std::exp(x) * q[static_cast<std::size_t>(i)];
        }
        f0[0] = f1[0] = 0.0;
        for (int i = 1; i < n_points; ++i) {
            const double xm = lo + h * (i - 0.5);
            const double qm = std::max(0.0, density(xm));
            f0[static_cast<std::size_t>(i)] =
                f0[static_cast<std::size_t>(i - 1)] +
                h / 6.0 * (q[static_cast<std::size_t>(i - 1)] + 4.0 * qm + q[static_cast<std::size_t>(i)]);
            f1[static_cast<std::size_t>(i)] =
                f1[static_cast<std::size_t>(i - 1)] +
                h / 6.0 * (eq[static_cast<std::size_t>(i - 1)] + 4.0 * std::exp(xm) * qm +
                           eq[static_cast<std::size_t>(i)]);
        }
    }

    int size() const { return static_cast<int>(q.size()); }
    double point(int i) const { return lo + h * i; }
    double mass() const { return f0.back(); }
    double mean_exp() const { return f1.back(); }

    /// Var[e^xi] from the table.
    double variance_exp() const {
        double acc = 0.0;
        std::vector<double> g(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) g[i] = std::exp(point(static_cast<int>(i))) * eq[i];
        acc = simpson(g, h);
        const double m = mean_exp();
        return acc - m * m;
    }

    double cdf(double y) const { return eval_prefix(f0, q, y); }
    double exp_cdf(double y) const { return eval_prefix(f1, eq, y); }

    /// Central moment of the density (k = 2 variance, k = 3 skew numerator).
    double central_moment(int k) const {
        std::vector<double> g(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) g[i] = point(static_cast<int>(i)) * q[i];
        const double m1 = simpson(g, h) / std::max(mass(), 1e-300);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double d = point(static_cast<int>(i)) - m1;
            g[i] = std::pow(d, k) * q[i];
        }
        return simpson(g, h);
    }

private:
    double eval_prefix(const std::vector<double>& pre, const std::vector<double>& deriv,
                       double y) const {
        if (y <= lo) return 0.0;
        if (y >= hi) return pre.back();
        const double u = (y - lo) / h;
        std::size_t j = static_cast<std::size_t>(u);
        if (j + 1 >= pre.size()) j = pre.size() - 2;
        const double t = u - static_cast<double>(j);
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * pre[j] + h10 * h * deriv[j] + h01 * pre[j + 1] + h11 * h * deriv[j + 1];
    }
};

/// Inverse-CDF sampling grid built on top of a DistributionTable.
class SamplingTable {
public:
    SamplingTable() = default;
    explicit SamplingTable(const DistributionTable& dist)
        : lo_(dist.lo), h_(dist.h), cdf_(dist.f0) {
        const double total = cdf_.back();
        detail::require(total > 0.0, "SamplingTable: zero total mass");
        for (double& c : cdf_) c /= total;
    }

    /// Maps a uniform u in [0,1) to a log-return sample.
    double sample(double u) const {
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t j = static_cast<std::size_t>(it - cdf_.begin());
        if (j == 0) j = 1;
        if (j >= cdf_.size()) j = cdf_.size() - 1;
        const double c0 = cdf_[j - 1], c1 = cdf_[j];
        const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
        return lo_ + h_ * (static_cast<double>(j - 1) + frac);
    }

private:
    double lo_ = 0, h_ = 0;
    std::vector<double> cdf_;
};

/// Abstract one-factor pricing model. Period t covers (T_t, T_{t+1}];
/// put(t, K, s) is the value at T_t of the put expiring T_{t+1}, written on
/// the spot-s asset. Strike derivatives follow the usual static-hedging
/// conventions; gamma is the second spot derivative.
class OneFactorModel {
public:
    virtual ~OneFactorModel() = default;

    virtual int n_periods() const = 0;
    virtual double period_dt() const = 0;
    virtual double rate() const { return 0.0; }
    virtual bool satisfies_a1() const = 0;
    virtual bool satisfies_a2() const = 0;

    virtual double put(int t, double strike, double spot) const = 0;
    virtual double call(int t, double strike, double spot) const = 0;
    virtual double put_delta(int t, double strike, double spot) const = 0;
    virtual double gamma(int t, double strike, double spot) const = 0;
    virtual double dstrike_put(int t, double strike, double spot) const = 0;
    virtual double d2strike_put(int t, double strike, double spot) const = 0;

    /// Delta of the call via put-call parity.
    double call_delta(int t, double strike, double spot) const {
        return put_delta(t, strike, spot) + 1.0;
    }

    virtual double log_return_density(int t, double xi) const = 0;
    virtual double log_return_density_span(int t0, int t1, double xi) const = 0;
    virtual std::pair<double, double> log_return_support(int t) const = 0;
    virtual std::pair<double, double> log_return_support_span(int t0, int t1) const = 0;
    virtual double gamma_span(int t0, int t1, double strike, double spot) const = 0;

    virtual double sample_log_return(int t, double u) const = 0;
    virtual double period_return_variance(int t) const = 0; // Var[S_{t+1}/S_t]

    virtual const DistributionTable& distribution(int t) const = 0;

    double period_discount(int t0, int t1) const {
        return std::exp(-rate() * period_dt() * (t1 - t0));
    }
};

/// Generic exponential-Levy model (independent returns, scaling property):
/// all pricing reduces to the tabulated partial moments of the one-period
/// log-return density. Concrete models supply the density and its support
/// and call init_tables() at the end of their constructor.
class LevyModel : public OneFactorModel {
public:
    int n_periods() const override { return n_periods_; }
    double period_dt() const override { return dt_; }
    double rate() const override { return rate_; }
    bool satisfies_a1() const override { return true; }
    bool satisfies_a2() const override { return true; }

    double put(int t, double strike, double spot) const override {
        const double df = period_discount(t, t + 1);
        if (strike <= 0.0) return 0.0;
        if (spot <= 0.0) return df * strike * distribution(t).mass();
        const auto& tbl = distribution(t);
        const double y = std::log(strike / spot);
        return df * (strike * tbl.cdf(y) - spot * tbl.exp_cdf(y));
    }

    double call(int t, double strike, double spot) const override {
        const double df = period_discount(t, t + 1);
        if (spot <= 0.0) return 0.0;
        const auto& tbl = distribution(t);
        if (strike <= 0.0) return df * (spot * tbl.mean_exp() - strike * tbl.mass());
        const double y = std::log(strike / spot);
        return df * (spot * (tbl.mean_exp() - tbl.exp_cdf(y)) - strike * (tbl.mass() - tbl.cdf(y)));
    }

    double put_delta(int t, double strike, double spot) const override {
        const double df = period_discount(t, t + 1);
        if (strike <= 0.0) return 0.0;
        if (spot <= 0.0) return -df * distribution(t).mean_exp();
        return -df * distribution(t).exp_cdf(std::log(strike / spot));
    }

    double gamma(int t, double strike, double spot) const override {
        if (strike <= 0.0 || spot <= 0.0) return 0.0;
        const double df = period_discount(t, t + 1);
        return df * strike / (spot * spot) * log_return_density(t, std::log(strike / spot));
    }

    double dstrike_put(int t, double strike, double spot) const override {
        const double df = period_discount(t, t + 1);
        if (strike <= 0.0) return 0.0;
        if (spot <= 0.0) return df * distribution(t).mass();
        return df * distribution(t).cdf(std::log(strike / spot));
    }

    double d2strike_put(int t, double strike, double spot) const override {
        if (strike <= 0.0 || spot <= 0.0) return 0.0;
        const double df = period_discount(t, t + 1);
        return df / strike * log_return_density(t, std::log(strike / spot));
    }

    double gamma_span(int t0, int t1, double strike, double spot) const override {
        if (strike <= 0.0 || spot <= 0.0) return 0.0;
        const double df = period_discount(t0, t1);
        return df * strike / (spot * spot) * log_return_density_span(t0, t1, std::log(strike / spot));
    }

    double sample_log_return(int t, double u) const override {
        return sampling_.at(static_cast<std::size_t>(t)).sample(u);
    }

    double period_return_variance(int t) const override {
        return distribution(t).variance_exp();
    }

    const DistributionTable& distribution(int t) const override {
        detail::require(t >= 0 && t < n_periods_, "model: period index out of range");
        return tables_[static_cast<std::size_t>(t)];
    }

protected:
    LevyModel(int n_periods, double dt, double rate, int table_points)
        : n_periods_(n_periods), dt_(dt), rate_(rate), table_points_(table_points) {
        detail::require(n_periods_ >= 1, "model: n_periods must be >= 1");
        detail::require(dt_ > 0.0, "model: dt must be > 0");
        detail::require(table_points_ >= 257, "model: table_points too small");
    }

    // Expected value of int e^xi q_t(xi) dxi; the reverse adjoint at a
    // non-zero rate carries the discount factor instead of the growth factor.
    virtual double table_martingale_target(int) const { return std::exp(rate_ * dt_); }

    // Called at the end of the concrete constructor, when the density
    // virtuals are available.
    void init_tables() {
        tables_.reserve(static_cast<std::size_t>(n_periods_));
        sampling_.reserve(static_cast<std::size_t>(n_periods_));
        for (int t = 0; t < n_periods_; ++t) {
            const auto [lo, hi] = log_return_support(t);
            DistributionTable tbl([this, t](double x) { return log_return_density(t, x); }, lo, hi,
                                  table_points_);
            if (std::abs(tbl.mass() - 1.0) > 1e-4)
                throw numerical_error("model: tabulated density mass is off for period " +
                                          std::to_string(t),
                                      std::abs(tbl.mass() - 1.0));
            const double target = table_martingale_target(t);
            if (std::abs(tbl.mean_exp() - target) > 1e-4)
                throw numerical_error("model: tabulated martingale check failed for period " +
                                          std::to_string(t),
                                      std::abs(tbl.mean_exp() - target));
            sampling_.emplace_back(tbl);
            tables_.push_back(std::move(tbl));
        }
    }

    int n_periods_;
    double dt_;
    double rate_;
    int table_points_;

private:
    std::vector<DistributionTable> tables_;
    std::vector<SamplingTable> sampling_;
};

} // namespace gmwb
