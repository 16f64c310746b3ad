#pragma once

// Shared fixtures and brute-force oracles for the test suites. Nothing here
// calls the library's optimizers; the oracles enumerate directly.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "explab/hypothesis.hpp"
#include "explab/piecewise.hpp"
#include "explab/structure.hpp"

namespace testing_support {

using namespace explab;

inline const Interval kUnit{0.0, 1.0};

inline Scenario make_scenario(std::vector<double> g_breaks, int k, double delta, int first_value = 0) {
    return Scenario{Density::uniform(kUnit), StepFunction(kUnit, std::move(g_breaks), first_value),
                    HypothesisClassSpec::k_boundary(k), delta};
}

// g with breaks (0.6, 0.9), one boundary, delta 0.1.
inline Scenario agnostic_scenario(double delta = 0.1) { return make_scenario({0.6, 0.9}, 1, delta); }
// g = f_{0.5,0.9}, one boundary.
inline Scenario pulse_scenario(double delta = 0.1) { return make_scenario({0.5, 0.9}, 1, delta); }
inline Scenario realizable_scenario(double cut = 0.6, double delta = 0.1) { return make_scenario({cut}, 1, delta); }

// Midpoint-rule integral of 1{a(x) != b(x)} weighted by the density.
inline double integrate_disagreement(const StepFunction& a, const StepFunction& b, const Density& mu,
                                     int cells = 200000) {
    const Interval& dom = mu.domain();
    const double h = dom.length() / cells;
    double total = 0.0;
    for (int i = 0; i < cells; ++i) {
        double x = dom.lo() + (i + 0.5) * h;
        if (a.value_at(x) != b.value_at(x)) {
            total += mu.density_at(x) * h;
        }
    }
    return total;
}

// Value of a boundary vector where each boundary may sit just before or just
// after its position: with side 0 a point equal to the position counts as
// crossed, with side 1 it does not.
struct Placed {
    double pos;
    int side;
    friend bool operator<(const Placed& a, const Placed& b) {
        return a.pos != b.pos ? a.pos < b.pos : a.side < b.side;
    }
    friend bool operator<=(const Placed& a, const Placed& b) { return !(b < a); }
};

inline int placed_value(const std::vector<Placed>& bs, double x) {
    int crossed = 0;
    for (const auto& b : bs) {
        if (x > b.pos || (x == b.pos && b.side == 0)) {
            ++crossed;
        }
    }
    return crossed & 1;
}

struct BruteErm {
    std::size_t min_errors = 0;
    double max_target_risk = 0.0;  // over minimizing closure vertices
};

// Exhaustive k-boundary ERM: every non-decreasing tuple of candidate
// positions (domain ends, sample points from both sides, target and density
// breakpoints).
inline BruteErm brute_force_erm(const std::vector<double>& xs, const std::vector<int>& ys, int k,
                                const StepFunction& target, const Density& mu) {
    const Interval& dom = mu.domain();
    std::vector<Placed> cand{{dom.lo(), 0}, {dom.hi(), 0}};
    for (double x : xs) {
        cand.push_back({x, 0});
        cand.push_back({x, 1});
    }
    for (double b : target.breakpoints()) {
        cand.push_back({b, 0});
    }
    for (double b : mu.breakpoints()) {
        cand.push_back({b, 0});
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end(),
                           [](const Placed& a, const Placed& b) { return a.pos == b.pos && a.side == b.side; }),
               cand.end());

    BruteErm best{std::numeric_limits<std::size_t>::max(), -1.0};
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    while (true) {
        std::vector<Placed> bs;
        std::vector<double> params;
        for (auto i : idx) {
            bs.push_back(cand[i]);
            params.push_back(cand[i].pos);
        }
        std::size_t errors = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            errors += placed_value(bs, xs[i]) != ys[i] ? 1 : 0;
        }
        double r = risk(Hypothesis::k_boundary(params), target, mu);
        if (errors < best.min_errors) {
            best = {errors, r};
        } else if (errors == best.min_errors) {
            best.max_target_risk = std::max(best.max_target_risk, r);
        }
        std::size_t pos = idx.size();
        while (pos > 0 && idx[pos - 1] == cand.size() - 1) {
            --pos;
        }
        if (pos == 0) {
            break;
        }
        std::size_t v = idx[pos - 1] + 1;
        for (std::size_t i = pos - 1; i < idx.size(); ++i) {
            idx[i] = v;
        }
    }
    return best;
}

inline std::vector<double> random_breaks(std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::vector<double> out;
    while (static_cast<int>(out.size()) < count) {
        double v = std::round(u(rng) * 1000.0) / 1000.0;
        bool clash = std::any_of(out.begin(), out.end(), [v](double o) { return std::abs(o - v) < 0.01; });
        if (!clash) {
            out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline Density random_density(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pieces(0, 2);
    auto breaks = random_breaks(rng, pieces(rng));
    std::uniform_real_distribution<double> w(0.5, 2.0);
    std::vector<double> weights(breaks.size() + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double lo = i == 0 ? 0.0 : breaks[i - 1];
        double hi = i == breaks.size() ? 1.0 : breaks[i];
        weights[i] = w(rng);
        total += weights[i] * (hi - lo);
    }
    for (double& v : weights) {
        v /= total;
    }
    return Density(kUnit, breaks, weights);
}

}  // namespace testing_support
