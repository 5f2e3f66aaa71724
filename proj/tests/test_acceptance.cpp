// Acceptance suite: one test case per criterion, one PASS/FAIL line each.
// Settings follow the library defaults; every tolerance is pinned here.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <gmwb/gmwb.hpp>

using namespace gmwb;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        INFO("criterion ", id, ": ", what);
        CHECK(cond);
        ok = ok && cond;
    }

    ~Criterion() {
        std::printf("[acceptance] criterion %2d  %-58s %s\n", id, name.c_str(),
                    ok ? "PASS" : "FAIL");
        std::fflush(stdout);
    }
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<VarianceGammaModel> acceptance_vg(int n_periods) {
    // explicit desk-scale parameterization; quarterly periods
    return std::make_shared<VarianceGammaModel>(0.12, 0.17, -0.14, n_periods, 0.25);
}

} // namespace

TEST_CASE("criterion 1: weight-curve laws") {
    Criterion c{1, "weight-curve laws (BS vol 0.3, w=10, N=5)"};
    const auto t0 = std::chrono::steady_clock::now();
    BlackScholesModel m(0.3, 5, 1.0);
    Schedule sch(5, 1.0, 10.0);
    auto curves = build_weight_curves(m, sch);
    double prev_var = -1.0;
    for (int t = 4; t >= 0; --t) {
        const auto& g = curves[static_cast<std::size_t>(t)];
        c.expect(std::abs(g.mass() - 1.0) <= 1e-6, "mass 1 +- 1e-6 at t=" + std::to_string(t));
        c.expect(std::abs(g.mean() - (5 - t) * 10.0) <= 0.01,
                 "mean (N-t) w +- 0.01 at t=" + std::to_string(t));
        c.expect(g.variance() > prev_var, "variance widens backwards at t=" + std::to_string(t));
        prev_var = g.variance();
    }
    c.expect(elapsed_s(t0) < 5.0, "runtime under 5 s");
}

TEST_CASE("criterion 2: oracle equivalence for the plain guarantee") {
    Criterion c{2, "weights value = Monte-Carlo oracle within 3 SE"};
    const auto t0 = std::chrono::steady_clock::now();
    const MCConfig mc{100000, 20260808, true};

    struct Setup {
        std::shared_ptr<const OneFactorModel> model;
        int n;
        double dt;
        std::string tag;
    };
    std::vector<Setup> setups;
    setups.push_back({std::make_shared<BlackScholesModel>(0.25, 2, 1.0), 2, 1.0, "BS 0.25 N=2"});
    setups.push_back({std::make_shared<BlackScholesModel>(0.3, 5, 1.0), 5, 1.0, "BS 0.30 N=5"});
    setups.push_back({acceptance_vg(8), 8, 0.25, "VG N=8"});

    for (const auto& s : setups) {
        Schedule sch(s.n, s.dt, 10.0);
        auto curves = build_weight_curves(*s.model, sch);
        for (double m : {0.7, 1.0, 1.3}) {
            const double x0 = s.n * 10.0 / m;
            const double v_static = value_from_weights(*s.model, curves[0], x0);
            auto v_mc = mc_guarantee_value(*s.model, GuaranteeSpec(sch, x0), mc);
            const double gap = std::abs(v_static - v_mc.value);
            c.expect(gap <= 3.0 * *v_mc.std_error,
                     s.tag + " moneyness " + std::to_string(m) + ": gap " + std::to_string(gap) +
                         " vs 3 SE " + std::to_string(3.0 * *v_mc.std_error));
        }
    }
    c.expect(elapsed_s(t0) < 60.0, "runtime under 60 s");
}

TEST_CASE("criterion 3: three-pipeline agreement") {
    Criterion c{3, "weights vs adjoint vs Markov surface, BS N=5 ATM"};
    auto model = std::make_shared<BlackScholesModel>(0.3, 5, 1.0);
    Schedule sch(5, 1.0, 10.0);
    GuaranteeSpec spec(sch, 50.0);

    auto curves = build_weight_curves(*model, sch);
    const double v_weights = value_from_weights(*model, curves[0], 50.0);
    auto adj = build_adjoint(std::static_pointer_cast<const OneFactorModel>(model));
    auto v_adj = price_via_adjoint(*model, *adj, sch, 50.0, 0, MCConfig{100000, 31337, true});
    auto v_markov = backward_markov_value(*model, spec);

    const double se3 = 3.0 * *v_adj.std_error;
    auto within = [&](double a, double b) {
        return std::abs(a - b) <= std::max(se3, 0.005 * std::max(std::abs(a), std::abs(b)));
    };
    c.expect(within(v_weights, v_adj.value), "weights vs adjoint");
    c.expect(within(v_weights, v_markov.v0), "weights vs Markov surface");
    c.expect(within(v_adj.value, v_markov.v0), "adjoint vs Markov surface");
}

TEST_CASE("criterion 4: replication identity") {
    Criterion c{4, "expired ladder finances claim plus next ladder"};
    BlackScholesModel m(0.3, 5, 1.0);
    Schedule sch(5, 1.0, 10.0);
    const double w = 10.0;
    auto curves = build_weight_curves(m, sch);
    for (int t = 1; t <= 4; ++t) {
        const auto& expiring = curves[static_cast<std::size_t>(t - 1)];
        const auto& next = curves[static_cast<std::size_t>(t)];
        const double m_t = next.mean();
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double spot = 2.0 + (28.0 - 2.0) * i / 49.0; // zeta = 1
            const double x = spot - w;
            const double lhs = expired_portfolio_value(expiring, 1.0, spot);
            double rhs = std::max(-x, 0.0);
            rhs += (x > 0.0) ? value_from_weights(m, next, x) : m_t;
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        c.expect(worst <= 1e-4 * w,
                 "t=" + std::to_string(t) + " worst gap " + std::to_string(worst));
    }
}

TEST_CASE("criterion 5: two-period boundary conditions") {
    Criterion c{5, "boundary values of the two-period surface (BS 0.25)"};
    BlackScholesModel m(0.25, 2, 1.0);
    GuaranteeSpec spec(Schedule(2, 1.0, 10.0), 20.0);
    const double w = 10.0, zeta0 = 20.0;
    auto res = backward_markov_value(m, spec);
    const auto& s1 = res.surfaces[1];
    c.expect(std::abs(s1.value_at_spot(0.0, zeta0) - 2.0 * w) <= 1e-6, "V_1(0) = 2w +- 1e-6");
    auto rep = verify_boundary_conditions(s1, w, zeta0);
    for (const auto& chk : rep.checks)
        c.expect(chk.pass, chk.name + " (dev " + std::to_string(chk.value) + ")");
}

TEST_CASE("criterion 6: reverse-adjoint lemma suite") {
    Criterion c{6, "gamma kernels, Chapman-Kolmogorov, adjoint laws"};
    auto bs = std::make_shared<BlackScholesModel>(0.3, 5, 1.0);
    auto vg = acceptance_vg(8);

    for (const auto& chk : gamma_kernel_checks(*bs).checks) c.expect(chk.pass, "BS " + chk.name);
    for (const auto& chk : gamma_kernel_checks(*vg).checks) c.expect(chk.pass, "VG " + chk.name);

    auto adj_bs = build_adjoint(std::static_pointer_cast<const OneFactorModel>(bs));
    auto adj_vg = build_adjoint(std::static_pointer_cast<const OneFactorModel>(vg));
    for (const auto& chk : adjoint_checks(*adj_bs).checks) c.expect(chk.pass, "BS " + chk.name);
    for (const auto& chk : adjoint_checks(*adj_vg).checks) c.expect(chk.pass, "VG " + chk.name);

    c.expect(sup_density_gap(*bs, *adj_bs) < 1e-8, "BS self-adjoint (sup-norm < 1e-8)");
    c.expect(vg->distribution(0).central_moment(3) < 0.0 &&
                 adj_vg->distribution(0).central_moment(3) > 0.0,
             "VG skew reversal");
}

TEST_CASE("criterion 7: roll-up feature") {
    Criterion c{7, "roll-up: terminal put, homogeneity, limits, MC oracle"};
    BlackScholesModel m(0.3, 5, 1.0);
    Schedule sch(5, 1.0, 10.0);
    GuaranteeSpec spec(sch, 50.0, RollupFeature{0.0});
    auto coeffs = build_rollup_coefficients(m, spec);

    // terminal value equals the single put exactly on a (w, X) grid
    double worst = 0.0;
    for (double w : {5.0, 10.0, 20.0})
        for (double x : {3.0, 15.0, 60.0})
            worst = std::max(worst, std::abs(rollup_value(m, spec, coeffs, w, x, 4).value -
                                             m.put(4, w, x)));
    c.expect(worst <= 1e-12, "terminal value is the single put");

    // degree-1 homogeneity
    const double v1 = rollup_value(m, spec, coeffs, 10.0, 45.0, 0).value;
    const double v2 = rollup_value(m, spec, coeffs, 20.0, 90.0, 0).value;
    c.expect(std::abs(v2 - 2.0 * v1) <= 1e-9 * v2, "degree-1 homogeneity to 1e-9");

    // huge guarantee base reproduces the plain value within 1%
    GuaranteeSpec big(sch, 50.0, RollupFeature{1e-3 - 1.0});
    auto big_coeffs = build_rollup_coefficients(m, big);
    auto plain = build_weight_curves(m, sch);
    const double v_big = rollup_value(m, big, big_coeffs, 10.0, 50.0, 0).value;
    const double v_plain = value_from_weights(m, plain[0], 50.0);
    c.expect(std::abs(v_big - v_plain) <= 0.01 * v_plain, "large-base limit within 1%");

    // Monte-Carlo oracle agreement at three moneyness levels
    for (double mny : {0.7, 1.0, 1.3}) {
        const double x0 = 50.0 / mny;
        GuaranteeSpec s(sch, x0, RollupFeature{0.0});
        auto cf = build_rollup_coefficients(m, s);
        const double v_static = rollup_value(m, s, cf, 10.0, x0, 0).value;
        auto v_mc = mc_rollup_value(m, s, MCConfig{100000, 555, true});
        c.expect(std::abs(v_static - v_mc.value) <= 3.0 * *v_mc.std_error,
                 "MC oracle at moneyness " + std::to_string(mny));
    }

    // ratchet adds value on the same seeded paths; infinite base is exact
    const MCConfig mc{50000, 777, false};
    GuaranteeSpec plain_spec(sch, 50.0);
    auto v_plain_mc = mc_guarantee_value(m, plain_spec, mc);
    auto v_roll_mc = mc_rollup_value(m, spec, mc);
    c.expect(v_roll_mc.value >= v_plain_mc.value, "roll-up value >= plain value, same seed");
    auto v_inf = mc_rollup_value(m, plain_spec, mc);
    c.expect(v_inf.value == v_plain_mc.value, "infinite base sentinel equals plain exactly");
}

TEST_CASE("criterion 8: dual put on the contribution fund") {
    Criterion c{8, "backward weights = direct MC (BS 0.25, p=10, N=2, K=20)"};
    auto model = std::make_shared<BlackScholesModel>(0.25, 2, 1.0);
    auto res = price_put_on_contribution_fund(model, 10.0, 20.0, MCConfig{100000, 4242, true});
    c.expect(std::abs(res.weights_value - res.direct_mc.value) <= 3.0 * *res.direct_mc.std_error,
             "backward-weights value within 3 SE of direct MC");
    c.expect(std::abs(res.weights_value - res.adjoint_mc.value) <=
                 3.0 * *res.adjoint_mc.std_error,
             "adjoint dual value within 3 SE");
}

TEST_CASE("criterion 9: net volga sign pattern") {
    Criterion c{9, "net volga > 0 at moneyness 1.0, < 0 at 0.6 (N=2, 5)"};
    for (int n : {2, 5}) {
        BlackScholesModel m(0.3, n, 1.0);
        Schedule sch(n, 1.0, 10.0);
        auto atm = net_volga_after_varswap_hedge(m, GuaranteeSpec(sch, n * 10.0));
        c.expect(atm.net_volga > 0.0, "N=" + std::to_string(n) + " long volga at the money");
        auto otm = net_volga_after_varswap_hedge(m, GuaranteeSpec(sch, n * 10.0 / 0.6));
        c.expect(otm.net_volga < 0.0, "N=" + std::to_string(n) + " short volga at moneyness 0.6");
    }
}

TEST_CASE("criterion 10: out-of-scope exclusions") {
    Criterion c{10, "stochastic-vol and stochastic-rate comparisons excluded"};
    // Heston-vs-local-vol differences and Hull-White hybrid sensitivities
    // are excluded by design; their qualitative content is covered by
    // criterion 9. Nothing to compute here.
    c.expect(true, "exclusions acknowledged");
}
