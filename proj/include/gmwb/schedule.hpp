#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "gmwb/common.hpp"

namespace gmwb {

/// Equidistant withdrawal calendar. Money amounts are in currency units,
/// times in years.
struct Schedule {
    int n_periods;          // N
    double dt;              // year fraction per period
    double withdrawal;      // w, deducted at each of T_1..T_N
    double maturity;        // T* = N * dt
    double annualized_rate; // omega = w / dt

    Schedule(int n_periods_, double dt_, double withdrawal_)
        : n_periods(n_periods_), dt(dt_), withdrawal(withdrawal_),
          maturity(n_periods_ * dt_), annualized_rate(withdrawal_ / dt_) {
        detail::require(n_periods >= 1, "Schedule: n_periods must be >= 1");
        detail::require(dt > 0.0, "Schedule: dt must be > 0");
        detail::require(withdrawal > 0.0, "Schedule: withdrawal must be > 0");
    }
};

struct RollupFeature {
    double rollup_rate; // r_R > -1
};

struct GuaranteeSpec {
    Schedule schedule;
    double initial_capital; // X_0
    std::optional<RollupFeature> rollup;

    GuaranteeSpec(Schedule s, double x0, std::optional<RollupFeature> r = std::nullopt)
        : schedule(std::move(s)), initial_capital(x0), rollup(std::move(r)) {
        detail::require(initial_capital > 0.0, "GuaranteeSpec: initial_capital must be > 0");
        if (rollup) detail::require(rollup->rollup_rate > -1.0,
                                    "GuaranteeSpec: rollup_rate must be > -1");
    }

    /// Total guaranteed withdrawals divided by initial capital; > 1 is
    /// in-the-money for the guarantee holder.
    double moneyness() const {
        return schedule.n_periods * schedule.withdrawal / initial_capital;
    }
};

/// Fund state at a withdrawal date, after the withdrawal was deducted.
/// fund_value keeps propagating arithmetically after depletion; claims only
/// read the depletion time and the fund value there.
struct FundState {
    int period = 0;        // t
    double fund_value = 0; // X_t (may be negative at the depletion step)
    double zeta = 0;       // X_t / S_t
    bool depleted = false; // tau <= t
};

inline FundState initial_fund_state(const GuaranteeSpec& spec) {
    // S_0 = 1 convention
    return FundState{0, spec.initial_capital, spec.initial_capital, false};
}

/// One period of the withdrawal-fund recursion X_{t+1} = X_t R - w.
inline FundState step_fund(const FundState& state, double gross_return, double w) {
    detail::require(gross_return > 0.0, "step_fund: gross_return must be > 0");
    FundState next;
    next.period = state.period + 1;
    next.fund_value = state.fund_value * gross_return - w;
    next.depleted = state.depleted || next.fund_value <= 0.0;
    // zeta_t = zeta_{t-1} - w / S_t, with S_t recovered from X/zeta
    if (state.fund_value != 0.0 && state.zeta != 0.0) {
        const double spot_next = state.fund_value / state.zeta * gross_return;
        next.zeta = state.zeta - w / spot_next;
    } else {
        next.zeta = 0.0;
    }
    return next;
}

struct DepletionResult {
    std::optional<int> tau;   // first t with X_t <= 0, if any
    std::vector<double> path; // X_1..X_N
};

/// Rolls the fund through a full return sequence and finds the depletion time.
inline DepletionResult depletion_time(double x0, const std::vector<double>& gross_returns,
                                      double w) {
    detail::require(x0 > 0.0, "depletion_time: x0 must be > 0");
    detail::require(!gross_returns.empty(), "depletion_time: empty return sequence");
    DepletionResult res;
    res.path.reserve(gross_returns.size());
    double x = x0;
    for (std::size_t t = 0; t < gross_returns.size(); ++t) {
        detail::require(gross_returns[t] > 0.0, "depletion_time: gross_return must be > 0");
        x = x * gross_returns[t] - w;
        res.path.push_back(x);
        if (!res.tau && x <= 0.0) res.tau = static_cast<int>(t) + 1;
    }
    return res;
}

/// Guarantee claim Z^(t) = w 1_{tau <= t-1} + X_t^- 1_{tau = t};  Z^(0) = 0.
inline double claim_amount(int t, std::optional<int> tau, double fund_value_at_t, double w) {
    detail::require(t >= 0, "claim_amount: t must be >= 0");
    if (t == 0 || !tau) return 0.0;
    if (*tau <= t - 1) return w;
    if (*tau == t) return fund_value_at_t < 0.0 ? -fund_value_at_t : 0.0;
    return 0.0;
}

/// One period of the multi-contribution fund Y_{t+1} = Y_t R + p, Y_0 = p.
inline double step_contribution_fund(double y, double gross_return, double p) {
    detail::require(gross_return > 0.0, "step_contribution_fund: gross_return must be > 0");
    detail::require(y >= p, "step_contribution_fund: fund below the seed contribution");
    return y * gross_return + p;
}

/// Guarantee base A_t = sum_{u=t+1}^{N} (1+r_R)^{-(u-t)}; A_N is the +inf
/// sentinel so the withdrawal level freezes at maturity.
inline double guarantee_base(int t, const GuaranteeSpec& spec) {
    const int n = spec.schedule.n_periods;
    detail::require(t >= 0 && t <= n, "guarantee_base: need 0 <= t <= N");
    if (t == n) return std::numeric_limits<double>::infinity();
    if (!spec.rollup) return std::numeric_limits<double>::infinity();
    const double r = spec.rollup->rollup_rate;
    detail::require(r > -1.0, "guarantee_base: rollup_rate must be > -1");
    double a = 0.0;
    for (int u = t + 1; u <= n; ++u) a += std::pow(1.0 + r, -(u - t));
    return a;
}

} // namespace gmwb
