#include <doctest.h>

#include <cmath>

#include <gmwb/sensitivities.hpp>

using namespace gmwb;

TEST_CASE("analytic and finite-difference vega/volga agree in the two-period case") {
    BlackScholesModel m(0.3, 2, 1.0);
    GuaranteeSpec spec(Schedule(2, 1.0, 10.0), 20.0);
    auto [vega_fd, volga_fd] = forward_vega_volga(m, spec, 1);
    auto [vega_an, volga_an] = forward_vega_volga_terminal(m, spec);
    CHECK(vega_an == doctest::Approx(vega_fd).epsilon(1e-4));
    CHECK(volga_an == doctest::Approx(volga_fd).epsilon(0.01));
    CHECK(vega_an > 0.0); // positive vega at the money
}

TEST_CASE("analytic terminal route matches finite differences for five periods") {
    BlackScholesModel m(0.3, 5, 1.0);
    GuaranteeSpec spec(Schedule(5, 1.0, 10.0), 50.0);
    auto [vega_fd, volga_fd] = forward_vega_volga(m, spec, 4);
    auto [vega_an, volga_an] = forward_vega_volga_terminal(m, spec);
    CHECK(vega_an == doctest::Approx(vega_fd).epsilon(1e-3));
    CHECK(volga_an == doctest::Approx(volga_fd).epsilon(0.01));
}

TEST_CASE("deep out-of-the-money vega vanishes") {
    BlackScholesModel m(0.3, 2, 1.0);
    // X_0 far above the guaranteed withdrawals: puts worthless
    GuaranteeSpec spec(Schedule(2, 1.0, 10.0), 200.0);
    auto [vega, volga] = forward_vega_volga(m, spec, 1);
    (void)volga;
    CHECK(std::abs(vega) < 1e-8);
}

TEST_CASE("halving the bump moves volga less than one percent") {
    BlackScholesModel m(0.3, 2, 1.0);
    GuaranteeSpec spec(Schedule(2, 1.0, 10.0), 20.0);
    SensitivityConfig coarse;
    SensitivityConfig fine;
    fine.bump = 0.5e-3;
    auto [v1, g1] = forward_vega_volga(m, spec, 1, coarse);
    auto [v2, g2] = forward_vega_volga(m, spec, 1, fine);
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-4));
    CHECK(g1 == doctest::Approx(g2).epsilon(0.01));
}

TEST_CASE("net volga sign pattern across moneyness") {
    for (int n : {2, 5}) {
        BlackScholesModel m(0.3, n, 1.0);
        Schedule sch(n, 1.0, 10.0);
        const double total = n * 10.0;

        GuaranteeSpec atm(sch, total);
        auto rep_atm = net_volga_after_varswap_hedge(m, atm);
        INFO("N=", n, " atm net volga ", rep_atm.net_volga);
        CHECK(rep_atm.net_volga > 0.0);

        GuaranteeSpec otm(sch, total / 0.6);
        auto rep_otm = net_volga_after_varswap_hedge(m, otm);
        INFO("N=", n, " otm net volga ", rep_otm.net_volga);
        CHECK(rep_otm.net_volga < 0.0);

        // totals aggregate the per-period parts
        double vs = 0.0, gs = 0.0;
        for (std::size_t i = 0; i < rep_atm.vega.size(); ++i) {
            vs += rep_atm.vega[i];
            gs += rep_atm.volga[i];
        }
        CHECK(vs == doctest::Approx(rep_atm.vega_total).epsilon(1e-10));
        CHECK(gs == doctest::Approx(rep_atm.volga_total).epsilon(1e-10));
    }
}

TEST_CASE("t_target outside the forward range is rejected") {
    BlackScholesModel m(0.3, 3, 1.0);
    GuaranteeSpec spec(Schedule(3, 1.0, 10.0), 30.0);
    CHECK_THROWS_AS(forward_vega_volga(m, spec, 0), std::invalid_argument);
    CHECK_THROWS_AS(forward_vega_volga(m, spec, 3), std::invalid_argument);
}
