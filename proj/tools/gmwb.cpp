// Batch front end: reads a run configuration, dispatches to the pricing
// pipelines and writes CSV/JSON artifacts.
//
// Exit codes: 0 ok, 1 validation error, 2 numerical-tolerance breach.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <gmwb/gmwb.hpp>

namespace fs = std::filesystem;
using namespace gmwb;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir_override;
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
    std::string pipeline = "weights";
    int hedge_period = 0;
    std::vector<double> moneyness_list;
};

RunConfig load_config(const CliOptions& opt) {
    RunConfig cfg = RunConfig::load(opt.config_path);
    if (!opt.out_dir_override.empty()) cfg.out_dir = opt.out_dir_override;
    if (opt.has_seed_override) cfg.mc.seed = opt.seed_override;
    return cfg;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    const fs::path p = fs::path(cfg.out_dir) / name;
    std::ofstream os(p);
    if (!os.good()) throw std::invalid_argument("cannot write " + p.string());
    os.precision(17);
    return os;
}

PricingResult as_result(double value, std::uint64_t seed) {
    PricingResult r;
    r.value = value;
    r.seed = seed;
    return r;
}

void write_price_json(const RunConfig& cfg, const std::string& pipeline,
                      const PricingResult& result) {
    auto os = open_out(cfg, "price_" + pipeline + ".json");
    os << "{\"pipeline\":\"" << pipeline << "\",\"result\":" << result.to_json() << "}\n";
    std::cout << pipeline << ": " << result.value;
    if (result.std_error) std::cout << " (se " << *result.std_error << ")";
    std::cout << "\n";
}

int cmd_price(const CliOptions& opt) {
    RunConfig cfg = load_config(opt);
    auto model = cfg.make_model();
    auto spec = cfg.make_spec();

    if (cfg.rollup_rate) {
        detail::require(opt.pipeline == "weights",
                        "price: roll-up guarantees support only the weights pipeline "
                        "(use compare-mc for the Monte-Carlo oracle)");
        auto coeffs = build_rollup_coefficients(*model, spec, cfg.rollup_grid);
        auto v = rollup_value(*model, spec, coeffs, cfg.withdrawal, cfg.initial_capital, 0);
        write_price_json(cfg, "weights", as_result(v.value, cfg.mc.seed));
        return 0;
    }

    const bool want_all = opt.pipeline == "all";
    double v_weights = 0.0, v_adjoint = 0.0, v_markov = 0.0;
    PricingResult r_adj;
    bool have_weights = false, have_adjoint = false, have_markov = false;

    if (want_all || opt.pipeline == "weights") {
        auto curves = build_weight_curves(*model, spec.schedule, cfg.weights);
        v_weights = value_from_weights(*model, curves[0], cfg.initial_capital);
        write_price_json(cfg, "weights", as_result(v_weights, cfg.mc.seed));
        have_weights = true;
    }
    if (want_all || opt.pipeline == "adjoint") {
        auto adj = build_adjoint(model, cfg.table_points);
        r_adj = price_via_adjoint(*model, *adj, spec.schedule, cfg.initial_capital, 0, cfg.mc);
        v_adjoint = r_adj.value;
        write_price_json(cfg, "adjoint", r_adj);
        have_adjoint = true;
    }
    if (want_all || opt.pipeline == "markov") {
        auto res = backward_markov_value(*model, spec, cfg.markov);
        v_markov = res.v0;
        write_price_json(cfg, "markov", as_result(res.v0, cfg.mc.seed));
        have_markov = true;
    }
    detail::require(have_weights || have_adjoint || have_markov,
                    "price: unknown pipeline '" + opt.pipeline +
                        "' (expected weights|adjoint|markov|all)");

    if (want_all) {
        const double a = std::abs(v_weights - v_adjoint) /
                         std::max({std::abs(v_weights), std::abs(v_adjoint), 1e-12});
        const double b = std::abs(v_weights - v_markov) /
                         std::max({std::abs(v_weights), std::abs(v_markov), 1e-12});
        const double c = std::abs(v_adjoint - v_markov) /
                         std::max({std::abs(v_adjoint), std::abs(v_markov), 1e-12});
        const double worst = std::max({a, b, c});
        auto os = open_out(cfg, "price_all.json");
        os << "{\"weights\":" << v_weights << ",\"adjoint\":" << r_adj.to_json()
           << ",\"markov\":" << v_markov << ",\"max_pairwise_rel_diff\":" << worst << "}\n";
        std::cout << "max pairwise relative difference: " << worst << "\n";
    }
    return 0;
}

int cmd_weights(const CliOptions& opt) {
    RunConfig cfg = load_config(opt);
    auto model = cfg.make_model();
    auto curves = build_weight_curves(*model, cfg.make_schedule(), cfg.weights);
    for (const auto& c : curves) {
        auto os = open_out(cfg, "weights_t" + std::to_string(c.period) + ".csv");
        c.to_csv(os);
        std::cout << "t=" << c.period << " mass=" << c.mass() << " mean=" << c.mean() << "\n";
    }
    return 0;
}

int cmd_hedge(const CliOptions& opt) {
    RunConfig cfg = load_config(opt);
    auto model = cfg.make_model();
    auto spec = cfg.make_spec();
    const int t = opt.hedge_period;
    detail::require(t >= 0 && t < cfg.n_periods, "hedge: --t must lie in [0, N-1]");
    auto os = open_out(cfg, "hedge_t" + std::to_string(t) + ".csv");
    os << "leg_type,strike,quantity\n";
    if (cfg.rollup_rate) {
        auto coeffs = build_rollup_coefficients(*model, spec, cfg.rollup_grid);
        auto v = rollup_value(*model, spec, coeffs, cfg.withdrawal, cfg.initial_capital, t);
        for (const auto& leg : v.legs)
            os << to_string(leg.type) << "," << leg.strike << "," << leg.quantity << "\n";
        std::cout << "rollup hedge value at t=" << t << ": " << v.value << "\n";
        return 0;
    }
    auto curves = build_weight_curves(*model, spec.schedule, cfg.weights);
    const auto& g = curves[static_cast<std::size_t>(t)];
    if (g.atom) os << "put," << g.atom->location << "," << g.atom->mass << "\n";
    if (g.has_grid()) {
        const double h = g.grid_step();
        for (std::size_t i = 0; i < g.strikes.size(); ++i) {
            const double width = (i == 0 || i + 1 == g.strikes.size()) ? 0.5 * h : h;
            const double qty = g.density[i] * width;
            if (qty > 1e-14) os << "put_strip_node," << g.strikes[i] << "," << qty << "\n";
        }
    }
    std::cout << "put ladder for t=" << t << " written\n";
    return 0;
}

int cmd_sensitivities(const CliOptions& opt) {
    RunConfig cfg = load_config(opt);
    detail::require(cfg.model_kind == "black_scholes",
                    "sensitivities: forward vega/volga analysis is Black-Scholes only");
    auto bs = std::make_shared<BlackScholesModel>(cfg.volatilities, cfg.n_periods, cfg.dt,
                                                  cfg.rate, cfg.table_points);
    std::vector<double> moneyness = opt.moneyness_list;
    if (moneyness.empty()) moneyness = {0.6, 0.8, 1.0, 1.2, 1.4};
    SensitivityConfig scfg;
    scfg.grid = cfg.weights;
    auto os = open_out(cfg, "sensitivities.csv");
    os << "moneyness,vega_total,volga_total,net_volga\n";
    for (double m : moneyness) {
        detail::require(m > 0.0, "sensitivities: moneyness must be > 0");
        const double x0 = cfg.n_periods * cfg.withdrawal / m;
        GuaranteeSpec spec(cfg.make_schedule(), x0);
        auto rep = net_volga_after_varswap_hedge(*bs, spec, scfg);
        os << m << "," << rep.vega_total << "," << rep.volga_total << "," << rep.net_volga
           << "\n";
        std::cout << "moneyness " << m << ": net volga " << rep.net_volga << "\n";
    }
    return 0;
}

int cmd_verify(const CliOptions& opt) {
    RunConfig cfg = load_config(opt);
    detail::require(cfg.rate == 0.0,
                    "verify: invariant checks assume the zero-rate base regime");
    auto model = cfg.make_model();
    auto spec = cfg.make_spec();

    VerifyReport rep;
    auto merge = [&rep](const VerifyReport& r) {
        for (const auto& i : r.items) rep.items.push_back(i);
    };
    merge(verify_model(*model));
    merge(verify_weight_laws(*model, spec.schedule, cfg.weights));
    merge(verify_replication(*model, spec.schedule, 50, cfg.weights));
    merge(verify_adjoint_suite(model));
    if (cfg.n_periods >= 2 && !cfg.rollup_rate) merge(verify_boundaries(*model, spec, cfg.markov));

    auto os = open_out(cfg, "verify_report.txt");
    int failures = 0;
    for (const auto& item : rep.items) {
        os << (item.pass ? "PASS" : "FAIL") << " [" << item.suite << "] " << item.name
           << " deviation=" << item.deviation << " tolerance=" << item.tolerance << "\n";
        if (!item.pass) ++failures;
    }
    std::cout << rep.items.size() << " checks, " << failures << " failures\n";
    return failures == 0 ? 0 : 2;
}

int cmd_compare_mc(const CliOptions& opt) {
    RunConfig cfg = load_config(opt);
    auto model = cfg.make_model();
    auto os = open_out(cfg, "compare_mc.csv");
    os << "n_periods,moneyness,static_value,mc_value,mc_std_error,abs_gap,tolerance,pass\n";
    int failures = 0;
    for (double pd : cfg.compare_periods) {
        const int n = static_cast<int>(pd);
        Schedule sch = cfg.make_schedule(n);
        for (double m : cfg.compare_moneyness) {
            const double x0 = n * cfg.withdrawal / m;
            double v_static = 0.0;
            PricingResult v_mc;
            if (cfg.rollup_rate) {
                GuaranteeSpec spec(sch, x0, RollupFeature{*cfg.rollup_rate});
                auto coeffs = build_rollup_coefficients(*model, spec, cfg.rollup_grid);
                v_static = rollup_value(*model, spec, coeffs, cfg.withdrawal, x0, 0).value;
                v_mc = mc_rollup_value(*model, spec, cfg.mc);
            } else {
                auto curves = build_weight_curves(*model, sch, cfg.weights);
                v_static = value_from_weights(*model, curves[0], x0);
                v_mc = mc_guarantee_value(*model, GuaranteeSpec(sch, x0), cfg.mc);
            }
            const double gap = std::abs(v_static - v_mc.value);
            const double tol = std::max(3.0 * v_mc.std_error.value_or(0.0), 0.005 * v_static);
            const bool pass = gap <= tol;
            if (!pass) ++failures;
            os << n << "," << m << "," << v_static << "," << v_mc.value << ","
               << v_mc.std_error.value_or(0.0) << "," << gap << "," << tol << ","
               << (pass ? "true" : "false") << "\n";
            std::cout << "N=" << n << " m=" << m << ": static " << v_static << " mc "
                      << v_mc.value << " +- " << v_mc.std_error.value_or(0.0)
                      << (pass ? "" : "  <-- BREACH") << "\n";
        }
    }
    return failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-static hedging and pricing of withdrawal guarantees"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "Run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", opt.out_dir_override, "Output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", opt.seed_override, "Override the Monte-Carlo seed");

    auto* price = app.add_subcommand("price", "Value the guarantee");
    price->add_option("--pipeline", opt.pipeline, "weights|adjoint|markov|all")
        ->default_val("weights");
    auto* weights = app.add_subcommand("weights", "Write the hedge weight curves");
    auto* hedge = app.add_subcommand("hedge", "Write the hedge portfolio at one roll date");
    hedge->add_option("--t", opt.hedge_period, "Roll date index")->default_val(0);
    auto* sens = app.add_subcommand("sensitivities", "Forward vega/volga report");
    sens->add_option("--moneyness", opt.moneyness_list, "Comma-separated moneyness list")
        ->delimiter(',');
    auto* verify = app.add_subcommand("verify", "Run the invariant suites");
    auto* compare = app.add_subcommand("compare-mc", "Static values against the Monte-Carlo oracle");

    CLI11_PARSE(app, argc, argv);
    opt.has_seed_override = seed_opt->count() > 0;

    try {
        if (price->parsed()) return cmd_price(opt);
        if (weights->parsed()) return cmd_weights(opt);
        if (hedge->parsed()) return cmd_hedge(opt);
        if (sens->parsed()) return cmd_sensitivities(opt);
        if (verify->parsed()) return cmd_verify(opt);
        if (compare->parsed()) return cmd_compare_mc(opt);
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
