#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include <gmwb/adjoint.hpp>
#include <gmwb/black_scholes.hpp>
#include <gmwb/variance_gamma.hpp>
#include <gmwb/weights.hpp>

using namespace gmwb;

namespace {

std::shared_ptr<BlackScholesModel> bs5() {
    return std::make_shared<BlackScholesModel>(0.3, 5, 1.0);
}

std::shared_ptr<VarianceGammaModel> vg8() {
    return std::make_shared<VarianceGammaModel>(0.12, 0.17, -0.14, 8, 0.25);
}

// two-sample Kolmogorov-Smirnov distance
double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

} // namespace

TEST_CASE("constant-vol Black-Scholes is its own reverse adjoint") {
    auto base = bs5();
    auto adj = build_adjoint(base);
    CHECK_FALSE(adj->experimental_rates());
    double sup = 0.0;
    for (int t = 0; t < 5; ++t) {
        const auto [lo, hi] = base->log_return_support(t);
        for (int i = 0; i <= 200; ++i) {
            const double xi = lo + (hi - lo) * i / 200.0;
            sup = std::max(sup, std::abs(adj->log_return_density(t, xi) -
                                         base->log_return_density(t, xi)));
        }
    }
    CHECK(sup < 1e-8);
}

TEST_CASE("adjoint reverses the skew of the variance-gamma density") {
    auto base = vg8();
    auto adj = build_adjoint(base);
    const double skew_base = base->distribution(0).central_moment(3);
    const double skew_adj = adj->distribution(0).central_moment(3);
    CHECK(skew_base < 0.0); // theta < 0: left-skewed
    CHECK(skew_adj > 0.0);  // reverse adjoint: right-skewed
}

TEST_CASE("adjoint densities normalize and stay martingales") {
    for (int kind : {0, 1}) {
        std::shared_ptr<const OneFactorModel> base;
        if (kind == 0) base = bs5();
        else base = vg8();
        auto adj = build_adjoint(base);
        auto rep = adjoint_checks(*adj);
        for (const auto& c : rep.checks) {
            INFO(c.name, " dev=", c.deviation);
            CHECK(c.pass);
        }
    }
}

TEST_CASE("gamma kernels are probability transition kernels") {
    for (int kind : {0, 1}) {
        std::shared_ptr<const OneFactorModel> base;
        if (kind == 0) base = std::make_shared<BlackScholesModel>(
            std::vector<double>{0.25, 0.3, 0.2, 0.3, 0.25}, 5, 1.0);
        else base = vg8();
        auto rep = gamma_kernel_checks(*base);
        for (const auto& c : rep.checks) {
            INFO(c.name, " dev=", c.deviation);
            CHECK(c.pass);
        }
    }
}

TEST_CASE("adjoint fund sampler") {
    auto adj = build_adjoint(bs5());

    // zero steps: degenerate at w
    auto d0 = sample_adjoint_fund(*adj, 10.0, 0, MCConfig{1000, 3});
    CHECK(d0.mean() == doctest::Approx(10.0));
    CHECK(d0.std_error() == doctest::Approx(0.0));

    // vanishing vol: deterministic (t+1) w
    auto flat = build_adjoint(std::make_shared<BlackScholesModel>(1e-4, 5, 1.0));
    auto df = sample_adjoint_fund(*flat, 10.0, 4, MCConfig{1000, 3});
    CHECK(df.mean() == doctest::Approx(50.0).epsilon(1e-4));

    // mean identity E[Y_t] = (t+1) w
    auto d4 = sample_adjoint_fund(*adj, 10.0, 4, MCConfig{100000, 17});
    CHECK(std::abs(d4.mean() - 50.0) < 3.0 * d4.std_error());

    CHECK_THROWS_AS(sample_adjoint_fund(*adj, 10.0, 5, MCConfig{1000, 3}),
                    std::invalid_argument);
}

TEST_CASE("dual pricing agrees with the weight pipeline") {
    auto base = bs5();
    auto adj = build_adjoint(base);
    Schedule sch(5, 1.0, 10.0);
    auto curves = build_weight_curves(*base, sch);

    // a huge fund value makes every put worthless
    auto far = price_via_adjoint(*base, *adj, sch, 5000.0, 0, MCConfig{2000, 5});
    CHECK(far.value < 1e-8);

    const double v_weights = value_from_weights(*base, curves[0], 50.0);
    auto v_adj = price_via_adjoint(*base, *adj, sch, 50.0, 0, MCConfig{200000, 41, true});
    const double tol = std::max(3.0 * *v_adj.std_error, 0.005 * v_weights);
    CHECK(std::abs(v_adj.value - v_weights) < tol);

    // intermediate period
    const double v2_weights = value_from_weights(*base, curves[2], 30.0);
    auto v2_adj = price_via_adjoint(*base, *adj, sch, 30.0, 2, MCConfig{200000, 42, true});
    CHECK(std::abs(v2_adj.value - v2_weights) <
          std::max(3.0 * *v2_adj.std_error, 0.005 * v2_weights));
}

TEST_CASE("variance-gamma dual pricing matches direct Monte-Carlo") {
    auto base = vg8();
    auto adj = build_adjoint(base);
    Schedule sch(8, 0.25, 10.0);
    GuaranteeSpec spec(sch, 80.0);
    auto direct = mc_guarantee_value(*base, spec, MCConfig{100000, 7, true});
    auto dual = price_via_adjoint(*base, *adj, sch, 80.0, 0, MCConfig{100000, 8, true});
    const double se = std::hypot(*direct.std_error, *dual.std_error);
    CHECK(std::abs(direct.value - dual.value) < 3.0 * se);
}

TEST_CASE("empirical weights from adjoint samples match the quadrature curves") {
    auto base = bs5();
    auto adj = build_adjoint(base);
    Schedule sch(5, 1.0, 10.0);
    auto curves = build_weight_curves(*base, sch);

    // degenerate case: one step less than the atom
    auto d0 = sample_adjoint_fund(*adj, 10.0, 0, MCConfig{1000, 3});
    auto atom_curve = empirical_weight_from_adjoint(d0, 50, 4);
    REQUIRE(atom_curve.atom.has_value());
    CHECK(atom_curve.atom->location == doctest::Approx(10.0));

    const int n_samples = 100000;
    auto d4 = sample_adjoint_fund(*adj, 10.0, 4, MCConfig{n_samples, 1234});
    auto hist = empirical_weight_from_adjoint(d4, 50, 0);
    CHECK(hist.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(hist.mean() - 50.0) < 3.0 * d4.std_error());

    const double d = ks_distance(d4.samples, curves[0]);
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(n_samples)));
}

TEST_CASE("put on a contribution fund: three routes agree") {
    auto model = std::make_shared<BlackScholesModel>(0.25, 2, 1.0);
    auto res = price_put_on_contribution_fund(model, 10.0, 20.0, MCConfig{200000, 55, true});
    CHECK(std::abs(res.weights_value - res.direct_mc.value) < 3.0 * *res.direct_mc.std_error);
    CHECK(std::abs(res.weights_value - res.adjoint_mc.value) < 3.0 * *res.adjoint_mc.std_error);

    // small strike: the fund cannot fall low enough
    auto small = price_put_on_contribution_fund(model, 10.0, 0.5, MCConfig{10000, 56});
    CHECK(small.weights_value < 1e-10);
    CHECK(small.direct_mc.value == 0.0);
}

TEST_CASE("duality round trip through the adjoint of the adjoint") {
    auto base = vg8();
    auto tilde = build_adjoint(base);
    auto back = build_adjoint(std::static_pointer_cast<const OneFactorModel>(tilde));
    double sup = 0.0;
    for (int t = 0; t < base->n_periods(); ++t) {
        const auto [lo, hi] = base->log_return_support(t);
        for (int i = 0; i <= 100; ++i) {
            const double xi = lo + (hi - lo) * i / 100.0;
            sup = std::max(sup, std::abs(back->log_return_density(t, xi) -
                                         base->log_return_density(t, xi)));
        }
    }
    CHECK(sup < 1e-8);

    // the adjoint is itself an A2 model: the dual put priced on it exercises
    // sampling under adjoint(adjoint) and returns consistent values
    auto res =
        price_put_on_contribution_fund(std::static_pointer_cast<const OneFactorModel>(tilde),
                                       10.0, 90.0, MCConfig{100000, 77, true},
                                       WeightGridConfig{.strike_points = 3001});
    CHECK(std::abs(res.weights_value - res.direct_mc.value) < 3.0 * *res.direct_mc.std_error);
    CHECK(std::abs(res.weights_value - res.adjoint_mc.value) < 3.0 * *res.adjoint_mc.std_error);
}

TEST_CASE("put-call symmetry: adjoint returns equal reversed base returns in law") {
    auto base = bs5();
    auto adj = build_adjoint(base);
    const int n = 5, t0 = 0, t1 = 2, n_samples = 20000;
    std::vector<double> a, b;
    a.reserve(n_samples);
    b.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        auto rng = path_stream(9000, static_cast<std::uint64_t>(i));
        double ra = 1.0, rb = 1.0;
        for (int t = t0; t < t1; ++t) ra *= std::exp(adj->sample_log_return(t, rng.uniform()));
        // S_{N-t0}/S_{N-t1}: base periods N-t1 .. N-t0-1
        for (int t = n - t1; t < n - t0; ++t)
            rb *= std::exp(base->sample_log_return(t, rng.uniform()));
        a.push_back(ra);
        b.push_back(rb);
    }
    const double d = two_sample_ks(a, b);
    CHECK(d < 1.63 * std::sqrt(2.0 / n_samples));
}

TEST_CASE("ten-year quarterly guarantee prices through the dual") {
    // the long-schedule case: forty quarterly withdrawals
    auto base = std::make_shared<VarianceGammaModel>(0.12, 0.17, -0.14, 40, 0.25);
    auto adj = build_adjoint(std::static_pointer_cast<const OneFactorModel>(base));
    Schedule sch(40, 0.25, 1.0);
    const double x0 = 40.0; // at the money
    auto direct = mc_guarantee_value(*base, GuaranteeSpec(sch, x0), MCConfig{100000, 12, true});
    auto dual = price_via_adjoint(*base, *adj, sch, x0, 0, MCConfig{100000, 13, true});
    const double se = std::hypot(*direct.std_error, *dual.std_error);
    INFO("direct ", direct.value, " dual ", dual.value, " se ", se);
    CHECK(std::abs(direct.value - dual.value) < 3.0 * se);
}

TEST_CASE("deterministic limit of the dual put weights route") {
    // near-zero vol: Y_{N-} -> N p, so the put tends to (K - N p)^+
    auto flat = std::make_shared<BlackScholesModel>(0.02, 3, 1.0);
    WeightGridConfig cfg;
    cfg.strike_points = 8001; // the near-degenerate kernels need resolution
    auto curves = contribution_put_weight_curves(*flat, 10.0, 35.0, cfg);
    const double v = value_from_weights(*flat, curves[0], 10.0);
    CHECK(v == doctest::Approx(5.0).epsilon(0.02));
}

TEST_CASE("non-zero rates are flagged experimental") {
    auto base = std::make_shared<BlackScholesModel>(0.3, 3, 1.0, 0.02);
    auto adj = build_adjoint(base);
    CHECK(adj->experimental_rates());
    // density carries the discount factor per period
    const auto& tbl = adj->distribution(0);
    CHECK(tbl.mass() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(tbl.mean_exp() == doctest::Approx(std::exp(-0.02)).epsilon(1e-6));
}
