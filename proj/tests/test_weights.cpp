#include <doctest.h>

#include <cmath>
#include <sstream>

#include <gmwb/black_scholes.hpp>
#include <gmwb/mc.hpp>
#include <gmwb/variance_gamma.hpp>
#include <gmwb/weights.hpp>

using namespace gmwb;

namespace {
const Schedule sched5(5, 1.0, 10.0);
const Schedule sched2(2, 1.0, 10.0);
} // namespace

TEST_CASE("terminal weight has unit mass and mean 2w") {
    BlackScholesModel m(0.3, 5, 1.0);
    auto g = terminal_weight(m, sched5);
    CHECK(g.period == 3);
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(g.mean() == doctest::Approx(20.0).epsilon(1e-4));
    CHECK(g.density.front() == 0.0); // closed at k = w by the kernel limit
}

TEST_CASE("terminal weight concentrates near 2w as vol vanishes") {
    BlackScholesModel m(0.01, 2, 1.0);
    WeightGridConfig cfg;
    cfg.strike_points = 20001; // the near-deterministic spike needs resolution
    auto g = terminal_weight(m, sched2, cfg);
    CHECK(g.mean() == doctest::Approx(20.0).epsilon(1e-5));
    CHECK(std::sqrt(g.variance()) < 0.2);
}

TEST_CASE("one recursion step from the Dirac atom reproduces the terminal weight") {
    BlackScholesModel m(0.3, 5, 1.0);
    auto direct = terminal_weight(m, sched5);
    auto atom = WeightCurve::dirac(4, 10.0);
    auto via_atom = recurse_weight(m, atom, 10.0, {}, &direct.strikes);
    REQUIRE(via_atom.density.size() == direct.density.size());
    double max_dev = 0.0;
    for (std::size_t i = 0; i < direct.density.size(); ++i)
        max_dev = std::max(max_dev, std::abs(via_atom.density[i] - direct.density[i]));
    CHECK(max_dev < 1e-6);
}

TEST_CASE("weight curves obey the mass and mean laws and widen backwards") {
    BlackScholesModel m(0.3, 5, 1.0);
    auto curves = build_weight_curves(m, sched5);
    REQUIRE(curves.size() == 5);
    double prev_var = -1.0;
    for (int t = 4; t >= 0; --t) {
        const auto& g = curves[static_cast<std::size_t>(t)];
        CHECK(g.period == t);
        CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(g.mean() == doctest::Approx((5 - t) * 10.0).epsilon(1e-4));
        CHECK(g.variance() > prev_var);
        prev_var = g.variance();
    }
    CHECK(std::abs(curves[0].mean() - 50.0) < 0.05);
}

TEST_CASE("value_from_weights limits") {
    BlackScholesModel m(0.3, 5, 1.0);
    auto curves = build_weight_curves(m, sched5);
    const auto& g0 = curves[0];

    // far in the money for the fund: all puts worthless, monotone decay
    double prev = 1e300;
    for (double x : {50.0, 100.0, 200.0, 400.0, 800.0}) {
        const double v = value_from_weights(m, g0, x);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(value_from_weights(m, g0, 2000.0) < 1e-8);

    // fund near zero: every future withdrawal owed, value -> mean
    CHECK(value_from_weights(m, g0, 1e-9) == doctest::Approx(g0.mean()).epsilon(1e-6));

    CHECK_THROWS_AS(value_from_weights(m, g0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(value_from_weights(m, g0, 0.0), std::invalid_argument);
}

TEST_CASE("two-period ATM value matches the Monte-Carlo oracle") {
    BlackScholesModel m(0.25, 2, 1.0);
    GuaranteeSpec spec(sched2, 20.0);
    auto curves = build_weight_curves(m, sched2);
    const double v_static = value_from_weights(m, curves[0], 20.0);
    auto v_mc = mc_guarantee_value(m, spec, MCConfig{200000, 11, true});
    CHECK(std::abs(v_static - v_mc.value) < 3.0 * *v_mc.std_error);
}

TEST_CASE("five-period values match the Monte-Carlo oracle across moneyness") {
    BlackScholesModel m(0.3, 5, 1.0);
    auto curves = build_weight_curves(m, sched5);
    for (double moneyness : {0.7, 1.0, 1.3}) {
        const double x0 = 50.0 / moneyness;
        const double v_static = value_from_weights(m, curves[0], x0);
        auto v_mc = mc_guarantee_value(m, GuaranteeSpec(sched5, x0), MCConfig{100000, 29, true});
        CHECK(std::abs(v_static - v_mc.value) < 3.0 * *v_mc.std_error);
    }
}

TEST_CASE("variance-gamma weight laws and oracle agreement") {
    VarianceGammaModel m(0.12, 0.17, -0.14, 8, 0.25);
    Schedule sch(8, 0.25, 10.0);
    WeightGridConfig cfg;
    cfg.strike_points = 4001; // resolve the density cusp in strike space
    auto curves = build_weight_curves(m, sch, cfg);
    for (int t : {0, 3, 6}) {
        CHECK(curves[static_cast<std::size_t>(t)].mass() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(curves[static_cast<std::size_t>(t)].mean() ==
              doctest::Approx((8 - t) * 10.0).epsilon(1e-4));
    }
    const double x0 = 80.0;
    const double v_static = value_from_weights(m, curves[0], x0);
    auto v_mc = mc_guarantee_value(m, GuaranteeSpec(sch, x0), MCConfig{100000, 31, true});
    CHECK(std::abs(v_static - v_mc.value) < 3.0 * *v_mc.std_error);
}

TEST_CASE("expired portfolio value basics") {
    BlackScholesModel m(0.3, 5, 1.0);
    auto curves = build_weight_curves(m, sched5);
    const auto& g = curves[2];
    // all puts out of the money
    CHECK(expired_portfolio_value(g, 1.0, g.strikes.back() + 1.0) == 0.0);
    // worthless asset: ladder pays the full first moment
    CHECK(expired_portfolio_value(g, 1.0, 0.0) == doctest::Approx(g.first_moment()));
    CHECK(expired_portfolio_value(g, 1.0, 0.0) / g.mass() ==
          doctest::Approx((5 - 2) * 10.0).epsilon(1e-4));
}

TEST_CASE("replication identity on a spot grid") {
    // expired ladder g_{t-1} finances the claim plus the next ladder g_t
    BlackScholesModel m(0.3, 5, 1.0);
    const double w = 10.0;
    auto curves = build_weight_curves(m, sched5);
    for (int t = 1; t <= 4; ++t) {
        const auto& expiring = curves[static_cast<std::size_t>(t - 1)];
        const auto& next = curves[static_cast<std::size_t>(t)];
        const double m_t = next.mean();
        const double zeta = 1.7; // arbitrary scale; identity holds pointwise
        for (int i = 0; i < 50; ++i) {
            const double spot = (2.0 + 28.0 * i / 49.0) / zeta; // X from -8 to 18
            const double x = zeta * spot - w;
            const double lhs = expired_portfolio_value(expiring, zeta, spot);
            double rhs = std::max(-x, 0.0);
            rhs += (x > 0.0) ? value_from_weights(m, next, x) : m_t;
            CHECK(std::abs(lhs - rhs) < 1e-4 * w);
        }
    }
}

TEST_CASE("value is monotone in fund and volatility") {
    auto value_at = [&](double sigma, double x0) {
        BlackScholesModel m(sigma, 5, 1.0);
        auto curves = build_weight_curves(m, sched5);
        return value_from_weights(m, curves[0], x0);
    };
    // strictly decreasing in X_0
    CHECK(value_at(0.3, 40.0) > value_at(0.3, 50.0));
    CHECK(value_at(0.3, 50.0) > value_at(0.3, 60.0));
    // increasing in volatility at the money
    CHECK(value_at(0.35, 50.0) > value_at(0.3, 50.0));
    CHECK(value_at(0.3, 50.0) > value_at(0.25, 50.0));
}

TEST_CASE("weight curve CSV round trip") {
    BlackScholesModel m(0.3, 5, 1.0);
    auto curves = build_weight_curves(m, sched5);
    std::stringstream ss;
    curves[1].to_csv(ss);
    auto back = WeightCurve::from_csv(ss);
    REQUIRE(back.strikes.size() == curves[1].strikes.size());
    CHECK(back.mass() == doctest::Approx(curves[1].mass()).epsilon(1e-12));
    CHECK(back.mean() == doctest::Approx(curves[1].mean()).epsilon(1e-12));

    std::stringstream sa;
    curves[4].to_csv(sa);
    auto atom_back = WeightCurve::from_csv(sa);
    REQUIRE(atom_back.atom.has_value());
    CHECK(atom_back.atom->location == doctest::Approx(10.0));
    CHECK(atom_back.atom->mass == doctest::Approx(1.0));
}

TEST_CASE("strict mode renormalizes mass and preserves shape") {
    BlackScholesModel m(0.3, 5, 1.0);
    WeightGridConfig loose;
    loose.sd_mult = 8.0; // deliberately tight grid: visible mass drift
    auto plain = build_weight_curves(m, sched5, loose);
    CHECK(std::abs(plain[0].mass() - 1.0) > 1e-7);
    CHECK(plain[0].mass_drift != 0.0); // reported, not silently fixed

    WeightGridConfig strict = loose;
    strict.renormalize_mass = true;
    auto fixed = build_weight_curves(m, sched5, strict);
    CHECK(fixed[0].mass() == doctest::Approx(1.0).epsilon(1e-12));
    // shape preserved: densities proportional
    const double ratio = fixed[0].density[600] / plain[0].density[600];
    CHECK(fixed[0].density[1200] / plain[0].density[1200] ==
          doctest::Approx(ratio).epsilon(1e-9));
}

TEST_CASE("single-period guarantee is one put") {
    BlackScholesModel m(0.25, 1, 1.0);
    Schedule sch(1, 1.0, 10.0);
    auto curves = build_weight_curves(m, sch);
    REQUIRE(curves.size() == 1);
    REQUIRE(curves[0].atom.has_value());
    CHECK(value_from_weights(m, curves[0], 8.0) == doctest::Approx(m.put(0, 10.0, 8.0)));
}
