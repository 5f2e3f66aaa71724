#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gmwb/black_scholes.hpp"
#include "gmwb/markov.hpp"
#include "gmwb/mc.hpp"
#include "gmwb/model.hpp"
#include "gmwb/rollup.hpp"
#include "gmwb/schedule.hpp"
#include "gmwb/variance_gamma.hpp"
#include "gmwb/weights.hpp"

namespace gmwb {

/// Flat INI-style configuration: [section] headers, key = value lines,
/// '#' or ';' comments.
class IniFile {
public:
    static IniFile parse(std::istream& is) {
        IniFile ini;
        std::string line, section;
        int line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                const auto close = line.find(']');
                detail::require(close != std::string::npos,
                                "config line " + std::to_string(line_no) + ": unclosed section");
                section = line.substr(1, close - 1);
                trim(section);
                continue;
            }
            const auto eq = line.find('=');
            detail::require(eq != std::string::npos,
                            "config line " + std::to_string(line_no) + ": expected key = value");
            std::string key = line.substr(0, eq), value = line.substr(eq + 1);
            trim(key);
            trim(value);
            ini.values_[section][key] = value;
        }
        return ini;
    }

    static IniFile load(const std::string& path) {
        std::ifstream is(path);
        detail::require(is.good(), "config: cannot open " + path);
        return parse(is);
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = values_.find(section);
        return s != values_.end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        detail::require(has(section, key), "config: missing [" + section + "] " + key);
        return values_.at(section).at(key);
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        return has(section, key) ? values_.at(section).at(key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return to_double(section, key, get_string(section, key));
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        return to_double(section, key, values_.at(section).at(key));
    }

    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const {
        if (!has(section, key)) return fallback;
        const std::string& v = values_.at(section).at(key);
        try {
            std::size_t used = 0;
            const long long x = std::stoll(v, &used);
            detail::require(used == v.size(), "");
            return x;
        } catch (...) {
            throw std::invalid_argument("config: [" + section + "] " + key +
                                        " must be an integer, got '" + v + "'");
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = values_.at(section).at(key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw std::invalid_argument("config: [" + section + "] " + key +
                                    " must be a boolean, got '" + v + "'");
    }

    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 std::vector<double> fallback) const {
        if (!has(section, key)) return fallback;
        std::vector<double> out;
        std::istringstream ss(values_.at(section).at(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            trim(item);
            if (!item.empty()) out.push_back(to_double(section, key, item));
        }
        detail::require(!out.empty(), "config: [" + section + "] " + key + " is empty");
        return out;
    }

private:
    static void trim(std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        const auto b = s.find_last_not_of(" \t\r\n");
        s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    }

    static double to_double(const std::string& section, const std::string& key,
                            const std::string& v) {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            detail::require(used == v.size(), "");
            return x;
        } catch (...) {
            throw std::invalid_argument("config: [" + section + "] " + key +
                                        " must be a number, got '" + v + "'");
        }
    }

    std::map<std::string, std::map<std::string, std::string>> values_;
};

/// Parsed run configuration: model, guarantee, numerics, output sections.
struct RunConfig {
    // model
    std::string model_kind;
    std::vector<double> volatilities; // black_scholes
    double vg_sigma = 0.0, vg_nu = 0.0, vg_theta = 0.0;
    double rate = 0.0;
    int table_points = 4097;

    // guarantee
    int n_periods = 0;
    double dt = 0.0;
    double withdrawal = 0.0;
    double initial_capital = 0.0;
    std::optional<double> rollup_rate;

    // numerics
    WeightGridConfig weights;
    RollupGridConfig rollup_grid;
    MarkovConfig markov;
    MCConfig mc;

    // output
    std::string out_dir = "out";

    // compare_mc
    std::vector<double> compare_moneyness{0.7, 1.0, 1.3};
    std::vector<double> compare_periods; // defaults to the guarantee's N

    static RunConfig from_ini(const IniFile& ini) {
        RunConfig c;
        c.model_kind = ini.get_string("model", "kind");
        detail::require(c.model_kind == "black_scholes" || c.model_kind == "variance_gamma",
                        "config: [model] kind must be black_scholes or variance_gamma");
        c.rate = ini.get_double("model", "rate", 0.0);
        c.table_points = static_cast<int>(ini.get_int("model", "table_points", 4097));
        if (c.model_kind == "black_scholes") {
            if (ini.has("model", "volatilities"))
                c.volatilities = ini.get_list("model", "volatilities", {});
            else
                c.volatilities = {ini.get_double("model", "volatility")};
            for (double v : c.volatilities)
                detail::require(v > 0.0, "config: [model] volatility must be > 0");
        } else {
            c.vg_sigma = ini.get_double("model", "vg_sigma");
            c.vg_nu = ini.get_double("model", "vg_nu");
            c.vg_theta = ini.get_double("model", "vg_theta");
            detail::require(c.vg_sigma > 0.0, "config: [model] vg_sigma must be > 0");
            detail::require(c.vg_nu > 0.0, "config: [model] vg_nu must be > 0");
        }

        c.n_periods = static_cast<int>(ini.get_int("guarantee", "n_periods", 0));
        detail::require(c.n_periods >= 1, "config: [guarantee] n_periods must be >= 1");
        c.dt = ini.get_double("guarantee", "dt");
        detail::require(c.dt > 0.0, "config: [guarantee] dt must be > 0");
        c.withdrawal = ini.get_double("guarantee", "withdrawal");
        detail::require(c.withdrawal > 0.0, "config: [guarantee] withdrawal must be > 0");
        c.initial_capital = ini.get_double("guarantee", "initial_capital");
        detail::require(c.initial_capital > 0.0,
                        "config: [guarantee] initial_capital must be > 0");
        if (ini.has("guarantee", "rollup_rate")) {
            c.rollup_rate = ini.get_double("guarantee", "rollup_rate");
            detail::require(*c.rollup_rate > -1.0,
                            "config: [guarantee] rollup_rate must be > -1");
        }

        c.weights.strike_points = static_cast<int>(ini.get_int("numerics", "weight_points", 2001));
        c.weights.sd_mult = ini.get_double("numerics", "weight_sd_mult", 16.0);
        c.weights.renormalize_mass = ini.get_bool("numerics", "renormalize_mass", false);
        c.rollup_grid.points = static_cast<int>(ini.get_int("numerics", "rollup_points", 1001));
        c.markov.x_points = static_cast<int>(ini.get_int("numerics", "markov_x_points", 801));
        c.markov.zeta_points =
            static_cast<int>(ini.get_int("numerics", "markov_zeta_points", 1));
        c.markov.max_refinements =
            static_cast<int>(ini.get_int("numerics", "markov_refinements", 2));
        c.mc.n_paths = ini.get_int("numerics", "mc_paths", 100000);
        c.mc.antithetic = ini.get_bool("numerics", "antithetic", true);
        c.mc.seed = static_cast<std::uint64_t>(ini.get_int("numerics", "seed", 42));

        c.out_dir = ini.get_string("output", "directory", "out");

        c.compare_moneyness = ini.get_list("compare_mc", "moneyness_list", {0.7, 1.0, 1.3});
        c.compare_periods =
            ini.get_list("compare_mc", "n_periods_list", {static_cast<double>(c.n_periods)});
        return c;
    }

    static RunConfig load(const std::string& path) { return from_ini(IniFile::load(path)); }

    std::shared_ptr<const OneFactorModel> make_model() const {
        // the model must cover every span the pipelines touch
        int periods = n_periods;
        for (double p : compare_periods) periods = std::max(periods, static_cast<int>(p));
        if (model_kind == "black_scholes")
            return std::make_shared<BlackScholesModel>(volatilities, periods, dt, rate,
                                                       table_points);
        return std::make_shared<VarianceGammaModel>(vg_sigma, vg_nu, vg_theta, periods, dt, rate,
                                                    table_points);
    }

    Schedule make_schedule(int periods = 0) const {
        return Schedule(periods > 0 ? periods : n_periods, dt, withdrawal);
    }

    GuaranteeSpec make_spec() const {
        std::optional<RollupFeature> roll;
        if (rollup_rate) roll = RollupFeature{*rollup_rate};
        return GuaranteeSpec(make_schedule(), initial_capital, roll);
    }
};

} // namespace gmwb
