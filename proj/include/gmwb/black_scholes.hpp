#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "gmwb/model.hpp"

namespace gmwb {

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace detail {

// d1/d2 for total standard deviation v and discount factor df = e^{-r dt}:
// d1 = [ln(s/k) - ln(df)] / v + v/2.
inline void bs_d(double strike, double spot, double total_vol, double df, double& d1, double& d2) {
    d1 = (std::log(spot / strike) - std::log(df)) / total_vol + 0.5 * total_vol;
    d2 = d1 - total_vol;
}

} // namespace detail

/// Black-Scholes put on total volatility v = Sigma sqrt(dt), zero dividends.
inline double bs_put(double strike, double spot, double total_vol, double df = 1.0) {
    detail::require(strike >= 0.0, "bs_put: strike must be >= 0");
    detail::require(total_vol > 0.0, "bs_put: total_vol must be > 0");
    if (strike == 0.0) return 0.0;
    if (spot <= 0.0) return df * strike;
    double d1, d2;
    detail::bs_d(strike, spot, total_vol, df, d1, d2);
    return df * strike * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

inline double bs_call(double strike, double spot, double total_vol, double df = 1.0) {
    detail::require(strike >= 0.0, "bs_call: strike must be >= 0");
    if (spot <= 0.0) return 0.0;
    return bs_put(strike, spot, total_vol, df) + spot - strike * df;
}

/// Spot delta of the put.
inline double bs_delta(double strike, double spot, double total_vol, double df = 1.0) {
    detail::require(strike >= 0.0, "bs_delta: strike must be >= 0");
    if (strike == 0.0) return 0.0;
    if (spot <= 0.0) return -1.0;
    double d1, d2;
    detail::bs_d(strike, spot, total_vol, df, d1, d2);
    return -norm_cdf(-d1);
}

/// Second spot derivative; same for put and call.
inline double bs_gamma(double strike, double spot, double total_vol, double df = 1.0) {
    detail::require(strike >= 0.0, "bs_gamma: strike must be >= 0");
    if (strike == 0.0 || spot <= 0.0) return 0.0;
    double d1, d2;
    detail::bs_d(strike, spot, total_vol, df, d1, d2);
    return norm_pdf(d1) / (spot * total_vol);
}

inline double bs_dstrike_put(double strike, double spot, double total_vol, double df = 1.0) {
    detail::require(strike >= 0.0, "bs_dstrike_put: strike must be >= 0");
    if (strike == 0.0) return 0.0;
    if (spot <= 0.0) return df;
    double d1, d2;
    detail::bs_d(strike, spot, total_vol, df, d1, d2);
    return df * norm_cdf(-d2);
}

inline double bs_d2strike_put(double strike, double spot, double total_vol, double df = 1.0) {
    detail::require(strike >= 0.0, "bs_d2strike_put: strike must be >= 0");
    if (strike == 0.0 || spot <= 0.0) return 0.0;
    double d1, d2;
    detail::bs_d(strike, spot, total_vol, df, d1, d2);
    return df * norm_pdf(d2) / (strike * total_vol);
}

/// First derivative of gamma with respect to the annualized volatility Sigma,
/// dGamma/dSigma = sqrt(dt) (d1 d2 - 1) Gamma / v  with v = Sigma sqrt(dt).
inline double bs_gamma_dvol(double strike, double spot, double sigma, double dt, double df = 1.0) {
    detail::require(strike >= 0.0, "bs_gamma_dvol: strike must be >= 0");
    if (strike == 0.0 || spot <= 0.0) return 0.0;
    const double v = sigma * std::sqrt(dt);
    double d1, d2;
    detail::bs_d(strike, spot, v, df, d1, d2);
    return std::sqrt(dt) * (d1 * d2 - 1.0) * bs_gamma(strike, spot, v, df) / v;
}

/// Second Sigma derivative of gamma,
/// [2 + (d1 d2)^2 - 3 d1 d2 - d1^2 - d2^2] Gamma / Sigma^2 in total-vol form.
inline double bs_gamma_d2vol(double strike, double spot, double sigma, double dt,
                             double df = 1.0) {
    detail::require(strike >= 0.0, "bs_gamma_d2vol: strike must be >= 0");
    if (strike == 0.0 || spot <= 0.0) return 0.0;
    const double v = sigma * std::sqrt(dt);
    double d1, d2;
    detail::bs_d(strike, spot, v, df, d1, d2);
    const double dd = d1 * d2;
    return dt * (2.0 + dd * dd - 3.0 * dd - d1 * d1 - d2 * d2) * bs_gamma(strike, spot, v, df) /
           (v * v);
}

/// Black-Scholes model with per-period deterministic volatilities. Closed
/// forms everywhere; the tabulated density is kept for sampling so the
/// Monte-Carlo oracle and the quadrature pipelines draw from one source.
class BlackScholesModel final : public LevyModel {
public:
    BlackScholesModel(std::vector<double> vols, int n_periods, double dt, double flat_rate = 0.0,
                      int table_points = 4097)
        : LevyModel(n_periods, dt, flat_rate, table_points), vols_(std::move(vols)) {
        if (vols_.size() == 1) vols_.resize(static_cast<std::size_t>(n_periods), vols_.front());
        detail::require(static_cast<int>(vols_.size()) == n_periods,
                        "BlackScholesModel: need one volatility per period");
        for (double v : vols_) detail::require(v > 0.0, "BlackScholesModel: volatility must be > 0");
        init_tables();
    }

    BlackScholesModel(double vol, int n_periods, double dt, double flat_rate = 0.0,
                      int table_points = 4097)
        : BlackScholesModel(std::vector<double>{vol}, n_periods, dt, flat_rate, table_points) {}

    double volatility(int t) const { return vols_.at(static_cast<std::size_t>(t)); }
    const std::vector<double>& volatilities() const { return vols_; }

    /// Copy with one forward volatility bumped; grids elsewhere unchanged.
    BlackScholesModel with_bumped_vol(int t, double bump) const {
        std::vector<double> v = vols_;
        v.at(static_cast<std::size_t>(t)) += bump;
        return BlackScholesModel(v, n_periods_, dt_, rate_, table_points_);
    }

    // The interface methods accept non-positive strikes (a put struck at or
    // below zero is worthless); the free functions stay strict.
    double put(int t, double strike, double spot) const override {
        if (strike <= 0.0) return 0.0;
        return bs_put(strike, spot, total_vol(t, t + 1), period_discount(t, t + 1));
    }
    double call(int t, double strike, double spot) const override {
        const double df = period_discount(t, t + 1);
        if (strike <= 0.0) return spot - strike * df;
        return bs_call(strike, spot, total_vol(t, t + 1), df);
    }
    double put_delta(int t, double strike, double spot) const override {
        if (strike <= 0.0) return 0.0;
        return bs_delta(strike, spot, total_vol(t, t + 1), period_discount(t, t + 1));
    }
    double gamma(int t, double strike, double spot) const override {
        if (strike <= 0.0) return 0.0;
        return bs_gamma(strike, spot, total_vol(t, t + 1), period_discount(t, t + 1));
    }
    double dstrike_put(int t, double strike, double spot) const override {
        if (strike <= 0.0) return 0.0;
        return bs_dstrike_put(strike, spot, total_vol(t, t + 1), period_discount(t, t + 1));
    }
    double d2strike_put(int t, double strike, double spot) const override {
        if (strike <= 0.0) return 0.0;
        return bs_d2strike_put(strike, spot, total_vol(t, t + 1), period_discount(t, t + 1));
    }
    double gamma_span(int t0, int t1, double strike, double spot) const override {
        if (strike <= 0.0) return 0.0;
        return bs_gamma(strike, spot, total_vol(t0, t1), period_discount(t0, t1));
    }

    double log_return_density(int t, double xi) const override {
        return span_density(t, t + 1, xi);
    }
    double log_return_density_span(int t0, int t1, double xi) const override {
        return span_density(t0, t1, xi);
    }
    std::pair<double, double> log_return_support(int t) const override {
        return log_return_support_span(t, t + 1);
    }
    std::pair<double, double> log_return_support_span(int t0, int t1) const override {
        const double v = total_vol(t0, t1);
        const double mu = rate_ * dt_ * (t1 - t0) - 0.5 * v * v;
        return {mu - 8.5 * v, mu + 8.5 * v};
    }

    double period_return_variance(int t) const override {
        const double v = total_vol(t, t + 1);
        return std::exp(2.0 * rate_ * dt_) * (std::exp(v * v) - 1.0);
    }

private:
    double total_vol(int t0, int t1) const {
        double var = 0.0;
        for (int t = t0; t < t1; ++t) {
            const double v = vols_.at(static_cast<std::size_t>(t));
            var += v * v * dt_;
        }
        return std::sqrt(var);
    }

    double span_density(int t0, int t1, double xi) const {
        const double v = total_vol(t0, t1);
        const double mu = rate_ * dt_ * (t1 - t0) - 0.5 * v * v;
        return norm_pdf((xi - mu) / v) / v;
    }

    std::vector<double> vols_;
};

} // namespace gmwb
