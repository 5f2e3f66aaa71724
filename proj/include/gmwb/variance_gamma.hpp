#pragma once

#include <cmath>
#include <numbers>

#include "gmwb/model.hpp"

namespace gmwb {

/// Variance-gamma model priced by quadrature against its log-return density.
/// The raw VG density over horizon tau is
///   h(x) = C e^{theta x / sigma^2} (|x|/sqrt(A))^alpha K_alpha(|x| beta),
/// with A = 2 sigma^2/nu + theta^2, beta = sqrt(A)/sigma^2,
/// alpha = tau/nu - 1/2 and K the modified Bessel function of the second
/// kind. The per-period drift makes e^xi integrate to the period growth
/// factor, so the asset is a martingale under zero rates.
class VarianceGammaModel final : public LevyModel {
public:
    VarianceGammaModel(double sigma, double nu, double theta, int n_periods, double dt,
                       double flat_rate = 0.0, int table_points = 4097)
        : LevyModel(n_periods, dt, flat_rate, table_points), sigma_(sigma), nu_(nu),
          theta_(theta) {
        detail::require(sigma_ > 0.0, "VarianceGammaModel: sigma must be > 0");
        detail::require(nu_ > 0.0, "VarianceGammaModel: nu must be > 0");
        const double f = 1.0 - theta_ * nu_ - 0.5 * sigma_ * sigma_ * nu_;
        detail::require(f > 0.0, "VarianceGammaModel: martingale correction undefined "
                                 "(1 - theta nu - sigma^2 nu / 2 must be > 0)");
        omega_ = std::log(f) / nu_; // per unit time
        // The closed-form density diverges at the origin for tau/nu <= 1/2,
        // which tabulated quadrature cannot represent.
        detail::require(dt_ / nu_ > 0.5,
                        "VarianceGammaModel: requires dt/nu > 1/2 for a bounded density");
        init_tables();
    }

    double sigma() const { return sigma_; }
    double nu() const { return nu_; }
    double theta() const { return theta_; }

    double log_return_density(int t, double xi) const override {
        return log_return_density_span(t, t + 1, xi);
    }

    double log_return_density_span(int t0, int t1, double xi) const override {
        detail::require(t1 > t0, "VarianceGammaModel: bad span");
        const double tau = dt_ * (t1 - t0);
        const double drift = (rate_ + omega_) * tau;
        return raw_density(xi - drift, tau);
    }

    std::pair<double, double> log_return_support(int t) const override {
        return log_return_support_span(t, t + 1);
    }

    std::pair<double, double> log_return_support_span(int t0, int t1) const override {
        const double tau = dt_ * (t1 - t0);
        const double drift = (rate_ + omega_) * tau;
        // Tail decay rates of the VG density are beta -+ theta/sigma^2.
        const double beta = std::sqrt(2.0 * sigma_ * sigma_ / nu_ + theta_ * theta_) /
                            (sigma_ * sigma_);
        const double lam_right = beta - theta_ / (sigma_ * sigma_);
        const double lam_left = beta + theta_ / (sigma_ * sigma_);
        const double ref = raw_density_peak_scale(tau);
        const double cut = 1e-13 * ref;
        const double hi = drift + tail_point(tau, +1.0, lam_right, cut);
        const double lo = drift - tail_point(tau, -1.0, lam_left, cut);
        return {lo, hi};
    }

private:
    // log of the raw density; x != 0
    double raw_log_density(double x, double tau) const {
        const double a2 = 2.0 * sigma_ * sigma_ / nu_ + theta_ * theta_;
        const double beta = std::sqrt(a2) / (sigma_ * sigma_);
        const double alpha = tau / nu_ - 0.5;
        const double z = std::abs(x) * beta;
        const double log_c = std::numbers::ln2 - (tau / nu_) * std::log(nu_) -
                             0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma_) -
                             std::lgamma(tau / nu_);
        double log_k;
        if (z > 650.0) {
            log_k = 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z; // asymptotic tail
        } else {
            const double k = std::cyl_bessel_k(alpha, z);
            if (!(k > 0.0)) return -800.0;
            log_k = std::log(k);
        }
        return log_c + theta_ * x / (sigma_ * sigma_) +
               alpha * (std::log(std::abs(x)) - 0.5 * std::log(a2)) + log_k;
    }

    double raw_density(double x, double tau) const {
        const double alpha = tau / nu_ - 0.5;
        if (std::abs(x) < 1e-12) {
            // K_alpha(z) ~ Gamma(alpha) 2^{alpha-1} z^{-alpha} as z -> 0
            const double a2 = 2.0 * sigma_ * sigma_ / nu_ + theta_ * theta_;
            const double log_c = std::numbers::ln2 - (tau / nu_) * std::log(nu_) -
                                 0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma_) -
                                 std::lgamma(tau / nu_);
            const double log_lim = log_c + std::lgamma(alpha) + (alpha - 1.0) * std::numbers::ln2 +
                                   alpha * (2.0 * std::log(sigma_) - std::log(a2));
            return std::exp(log_lim);
        }
        return std::exp(raw_log_density(x, tau));
    }

    double raw_density_peak_scale(double tau) const {
        // density magnitude near the center, used to scale the tail cutoff
        return raw_density(0.25 * sigma_ * std::sqrt(tau), tau);
    }

    // smallest |x| (in the given direction) with density below cut
    double tail_point(double tau, double direction, double lam, double cut) const {
        double x = std::max(sigma_ * std::sqrt(tau), 30.0 / lam * 0.05);
        while (raw_density(direction * x, tau) > cut && x < 1e3) x *= 1.5;
        double lo = x / 1.5, hi = x;
        for (int i = 0; i < 40; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (raw_density(direction * mid, tau) > cut) lo = mid;
            else hi = mid;
        }
        return hi;
    }

    double sigma_, nu_, theta_;
    double omega_; // martingale drift correction per unit time
};

} // namespace gmwb
