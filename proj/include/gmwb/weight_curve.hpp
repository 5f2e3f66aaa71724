#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gmwb/common.hpp"
#include "gmwb/quadrature.hpp"

namespace gmwb {

struct PointMass {
    double location;
    double mass;
};

/// Discretized density over strikes on a uniform grid, with an optional
/// Dirac atom; the composition of one roll date's put ladder. Moments and
/// partial integrals are served from cached prefix integrals, with partial
/// cells handled by a local quadratic so kinked payoffs integrate cleanly.
class WeightCurve {
public:
    int period = 0;
    std::vector<double> strikes; // uniform ascending grid (may be empty for a pure atom)
    std::vector<double> density; // same length as strikes
    std::optional<PointMass> atom;
    double mass_drift = 0.0; // recorded by recursion steps, never silently fixed
    double mean_drift = 0.0;

    WeightCurve() = default;

    static WeightCurve dirac(int period, double location, double mass = 1.0) {
        WeightCurve c;
        c.period = period;
        c.atom = PointMass{location, mass};
        return c;
    }

    bool has_grid() const { return strikes.size() >= 3; }

    double grid_step() const {
        detail::require(strikes.size() >= 2, "WeightCurve: no grid");
        return (strikes.back() - strikes.front()) / (static_cast<double>(strikes.size()) - 1.0);
    }

    /// Rebuilds the cached prefix integrals; call after editing density.
    void finalize() {
        if (!has_grid()) {
            cum0_.clear();
            cum1_.clear();
            return;
        }
        detail::require(strikes.size() == density.size(),
                        "WeightCurve: strikes/density size mismatch");
        const double h = grid_step();
        cum0_ = prefix_integral(density, h);
        kg_.resize(density.size());
        std::vector<double> kkg(density.size());
        for (std::size_t i = 0; i < density.size(); ++i) {
            kg_[i] = strikes[i] * density[i];
            kkg[i] = strikes[i] * kg_[i];
        }
        cum1_ = prefix_integral(kg_, h);
        second_moment_ = prefix_integral(kkg, h).back();
    }

    double quad_mass() const { return cum0_.empty() ? 0.0 : cum0_.back(); }

    double mass() const { return quad_mass() + (atom ? atom->mass : 0.0); }

    /// Raw first moment (not normalized).
    double first_moment() const {
        return (cum1_.empty() ? 0.0 : cum1_.back()) + (atom ? atom->mass * atom->location : 0.0);
    }

    double mean() const {
        const double m = mass();
        detail::require(m > 0.0, "WeightCurve: zero mass");
        return first_moment() / m;
    }

    double variance() const {
        const double mu = mean();
        double m2 = second_moment_;
        if (atom) m2 += atom->mass * atom->location * atom->location;
        return std::max(0.0, m2 / mass() - mu * mu);
    }

    /// Grid mass on [k0, k]; atom excluded.
    double quad_cdf(double k) const {
        return eval_prefix(cum0_, density, k);
    }

    /// Full CDF including the atom.
    double cdf(double k) const {
        double c = quad_cdf(k);
        if (atom && atom->location <= k) c += atom->mass;
        return c;
    }

    /// integral over [k, infinity) of g
    double tail_mass(double k) const {
        double m = quad_mass() - quad_cdf(k);
        if (atom && atom->location >= k) m += atom->mass;
        return m;
    }

    /// integral over [k, infinity) of k' g(k')
    double tail_first_moment(double k) const {
        double m = (cum1_.empty() ? 0.0 : cum1_.back()) - eval_prefix(cum1_, kg_, k);
        if (atom && atom->location >= k) m += atom->mass * atom->location;
        return m;
    }

    /// Interpolated density value; 0 outside the grid. Atom excluded.
    double density_at(double k) const {
        if (!has_grid()) return 0.0;
        return interp_uniform(density, strikes.front(), grid_step(), k);
    }

    void to_csv(std::ostream& os) const {
        os.precision(17);
        os << "strike,weight\n";
        if (atom) os << "# atom," << atom->location << "," << atom->mass << "\n";
        for (std::size_t i = 0; i < strikes.size(); ++i)
            os << strikes[i] << "," << density[i] << "\n";
    }

    static WeightCurve from_csv(std::istream& is) {
        WeightCurve c;
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            if (line.rfind("# atom,", 0) == 0) {
                std::istringstream ss(line.substr(7));
                double loc = 0, m = 0;
                char comma = 0;
                ss >> loc >> comma >> m;
                c.atom = PointMass{loc, m};
                continue;
            }
            if (line[0] == '#' || line.rfind("strike", 0) == 0) continue;
            std::istringstream ss(line);
            double k = 0, g = 0;
            char comma = 0;
            ss >> k >> comma >> g;
            c.strikes.push_back(k);
            c.density.push_back(g);
        }
        c.finalize();
        return c;
    }

private:
    std::vector<double> cum0_, cum1_, kg_;
    double second_moment_ = 0.0;

    // prefix integral evaluated at arbitrary k: stored value at the node
    // below plus a partial-cell quadratic correction
    double eval_prefix(const std::vector<double>& cum, const std::vector<double>& f,
                       double k) const {
        if (cum.empty()) return 0.0;
        if (k <= strikes.front()) return 0.0;
        if (k >= strikes.back()) return cum.back();
        const double h = grid_step();
        const double u = (k - strikes.front()) / h;
        std::size_t j = static_cast<std::size_t>(u);
        if (j + 1 >= f.size()) j = f.size() - 2;
        const double s = k - strikes[j];
        double f0, f1, f2;
        if (j + 2 < f.size()) {
            f0 = f[j];
            f1 = f[j + 1];
            f2 = f[j + 2];
            return cum[j] + partial_cell_integral(f0, f1, f2, h, s);
        }
        // last cell: reuse the stencil ending at the boundary
        f0 = f[j - 1];
        f1 = f[j];
        f2 = f[j + 1];
        return cum[j - 1] + partial_cell_integral(f0, f1, f2, h, h + s);
    }
};

} // namespace gmwb
