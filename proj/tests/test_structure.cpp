#include <doctest.h>

#include <random>

#include "explab/errors.hpp"
#include "explab/structure.hpp"
#include "support.hpp"

using namespace explab;
using namespace testing_support;

namespace {

std::vector<double> boundaries_of(const GlpAnalysis& ga) {
    std::vector<double> out;
    for (const auto& h : ga.glps) {
        out.push_back(h.params().front());
    }
    return out;
}

// Exterior minimum of the excess risks on a fine grid of single thresholds.
double delta_max_scan(const Scenario& sc, const GlpAnalysis& ga, int points) {
    RegionClassifier regions(ga, sc.ground_truth);
    auto f_opt = ga.optimum().to_step_function(kUnit);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= points; ++i) {
        auto h = Hypothesis::k_boundary({static_cast<double>(i) / points});
        if (regions.classify(h) == 0) {
            continue;
        }
        auto f = h.to_step_function(kUnit);
        double to_opt = integrate_disagreement(f, f_opt, sc.density, 20000);
        double excess = integrate_disagreement(f, sc.ground_truth, sc.density, 20000) - ga.opt_risk;
        best = std::min({best, to_opt, excess});
    }
    return best;
}

}  // namespace

TEST_CASE("non-degeneracy") {
    CHECK(check_nondegenerate(agnostic_scenario()).ok);
    Scenario pieces{Density(kUnit, {0.3, 0.7}, {0.5, 1.75, 0.5}), StepFunction(kUnit, {0.5}, 1),
                    HypothesisClassSpec::k_boundary(3), 0.1};
    CHECK(check_nondegenerate(pieces).ok);
    CHECK_NOTHROW(validate_scenario(pieces));
    auto bad = agnostic_scenario();
    bad.delta = 0.0;
    CHECK_THROWS_AS(validate_scenario(bad), argument_error);
}

TEST_CASE("GLP enumeration reproduces the worked examples") {
    auto v = enumerate_glps(agnostic_scenario());
    CHECK(boundaries_of(v) == std::vector<double>{0.6, 1.0});
    CHECK(v.opt_risk == doctest::Approx(0.1).epsilon(1e-12));
    auto pulse = enumerate_glps(pulse_scenario());
    CHECK(boundaries_of(pulse) == std::vector<double>{0.5, 1.0});
    auto real = enumerate_glps(realizable_scenario(0.7));
    CHECK(boundaries_of(real) == std::vector<double>{0.7});
    CHECK(real.realizable());
    CHECK(real.d_regions.empty());
    Scenario lin{Density::uniform(kUnit), StepFunction(kUnit, {0.5}, 0), HypothesisClassSpec::linear2d(), 0.1};
    CHECK_THROWS_AS(enumerate_glps(lin), unsupported_class_error);
    std::vector<double> many;
    for (int i = 1; i <= 40; ++i) {
        many.push_back(i / 41.0);
    }
    CHECK_THROWS_AS(enumerate_glps(make_scenario(many, 6, 0.1)), resource_error);
}

TEST_CASE("dominating regions") {
    StepFunction pulse_g(kUnit, {0.5, 0.9}, 0);
    auto t0 = Hypothesis::k_boundary({0.5});
    auto t1 = Hypothesis::k_boundary({1.0});
    CHECK(dominating_region(t0, t1, pulse_g) == IntervalSet{Interval(0.5, 0.9)});
    auto v = enumerate_glps(agnostic_scenario());
    REQUIRE(v.d_regions.size() == 1);
    CHECK(v.d_regions[0].d == IntervalSet{Interval(0.6, 0.9)});
    CHECK(v.d_regions[0].d_prime == IntervalSet{Interval(0.9, 1.0)});
    CHECK(dominating_region(t0, t0, pulse_g).empty());
}

TEST_CASE("A-region membership") {
    auto sc = agnostic_scenario();
    auto ga = enumerate_glps(sc);
    CHECK(in_A_region(Hypothesis::k_boundary({0.7}), ga, sc.ground_truth, sc.density) == 0);
    CHECK(in_A_region(Hypothesis::k_boundary({0.95}), ga, sc.ground_truth, sc.density) == 1);
    CHECK(in_A_region(ga.glps[0], ga, sc.ground_truth, sc.density) == 0);
    CHECK(in_A_region(ga.glps[1], ga, sc.ground_truth, sc.density) == 1);
}

TEST_CASE("stability") {
    auto pulse = pulse_scenario();
    auto ga = enumerate_glps(pulse);
    CHECK(check_stability(ga.glps[0], pulse));
    CHECK(check_stability(ga.glps[1], pulse));
    auto v = agnostic_scenario();
    CHECK(check_stability(Hypothesis::k_boundary({0.6}), v));
    CHECK_FALSE(check_stability(Hypothesis::k_boundary({0.55}), v));
}

TEST_CASE("delta_max matches a grid scan") {
    auto v = agnostic_scenario();
    auto gv = enumerate_glps(v);
    double dv = delta_max(gv, v);
    CHECK(dv == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(dv - delta_max_scan(v, gv, 10000)) < 2e-4);

    auto p = pulse_scenario();
    auto gp = enumerate_glps(p);
    double dp = delta_max(gp, p);
    CHECK(dp == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(std::abs(dp - delta_max_scan(p, gp, 10000)) < 2e-4);

    auto r = realizable_scenario(0.7);
    CHECK(std::isinf(delta_max(enumerate_glps(r), r)));
}

TEST_CASE("disjointified alphabet") {
    std::vector<DominatingPair> one{{IntervalSet{Interval(0.6, 0.9)}, IntervalSet{Interval(0.9, 1.0)}}};
    auto am = disjointify(one, kUnit);
    REQUIRE(am.symbols.size() == 3);
    CHECK(am.symbols[0].name() == "X1");
    CHECK(am.symbols[0].region == IntervalSet{Interval(0.6, 0.9)});
    CHECK(am.symbols[1].name() == "X'1");
    CHECK(am.symbols[1].region == IntervalSet{Interval(0.9, 1.0)});
    CHECK(am.symbols[2].name() == "Xc");
    CHECK(am.symbols[2].region == IntervalSet{Interval(0.0, 0.6)});

    std::vector<DominatingPair> two{{IntervalSet{Interval(0.1, 0.4)}, IntervalSet{}},
                                    {IntervalSet{Interval(0.3, 0.5)}, IntervalSet{}}};
    auto am2 = disjointify(two, kUnit);
    REQUIRE(am2.symbols.size() == 4);
    CHECK(am2.symbols[0].name() == "X1");
    CHECK(am2.symbols[0].region == IntervalSet{Interval(0.1, 0.3)});
    CHECK(am2.symbols[1].name() == "X2");
    CHECK(am2.symbols[1].region == IntervalSet{Interval(0.4, 0.5)});
    CHECK(am2.symbols[2].name() == "X1,2");
    CHECK(am2.symbols[2].region == IntervalSet{Interval(0.3, 0.4)});

    std::vector<DominatingPair> whole{{IntervalSet{kUnit}, IntervalSet{}}};
    auto am3 = disjointify(whole, kUnit);
    REQUIRE(am3.symbols.size() == 1);
    CHECK(am3.symbols[0].name() == "X1");
}

TEST_CASE("alphabet probabilities and constraint matrix") {
    auto v = agnostic_scenario();
    auto am = build_alphabet(enumerate_glps(v), v.density);
    REQUIRE(am.q.size() == 3);
    CHECK(am.q[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(am.q[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(am.q[2] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(am.a_matrix == std::vector<std::vector<int>>{{1, -1}});

    GlpAnalysis two;
    two.glps = {Hypothesis::k_boundary({0.0}), Hypothesis::k_boundary({0.0}), Hypothesis::k_boundary({0.0})};
    two.d_regions = {{IntervalSet{Interval(0.1, 0.4)}, IntervalSet{}}, {IntervalSet{Interval(0.3, 0.5)}, IntervalSet{}}};
    auto am2 = build_alphabet(two, Density::uniform(kUnit));
    REQUIRE(am2.q.size() == 4);
    CHECK(am2.q[0] == doctest::Approx(0.2));
    CHECK(am2.q[1] == doctest::Approx(0.1));
    CHECK(am2.q[2] == doctest::Approx(0.1));
    CHECK(am2.q[3] == doctest::Approx(0.6));
    CHECK(am2.a_matrix == std::vector<std::vector<int>>{{1, 0, 1}, {0, 1, 1}});
}

namespace {

// Random agnostic scenarios: a ground truth with more breaks than the class has boundaries.
Scenario random_agnostic(std::mt19937_64& rng, int k) {
    std::uniform_int_distribution<int> extra(1, 3);
    return Scenario{random_density(rng), StepFunction(kUnit, random_breaks(rng, k + extra(rng)), 0),
                    HypothesisClassSpec::k_boundary(k), 0.05};
}

std::vector<double> random_boundaries(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> b(static_cast<std::size_t>(k));
    for (double& v : b) {
        v = u(rng);
    }
    std::sort(b.begin(), b.end());
    return b;
}

}  // namespace

TEST_CASE("property: A-regions partition the parameter space") {
    std::mt19937_64 rng(77);
    for (int k = 1; k <= 2; ++k) {
        for (int s = 0; s < 5; ++s) {
            auto sc = random_agnostic(rng, k);
            auto ga = enumerate_glps(sc);
            CHECK(ga.glps.size() >= 2);
            RegionClassifier regions(ga, sc.ground_truth);
            auto f_opt = ga.optimum().to_step_function(kUnit);
            for (int t = 0; t < 2000; ++t) {
                auto h = Hypothesis::k_boundary(random_boundaries(rng, k));
                std::size_t idx = 0;
                CHECK_NOTHROW(idx = regions.classify(h));
                CHECK(idx < ga.glps.size());
                if (idx == 0) {
                    double excess = risk(h, sc.ground_truth, sc.density) - ga.opt_risk;
                    CHECK(std::abs(excess - risk(h, f_opt, sc.density)) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("property: symbol counts reproduce dominating-region counts") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 6; ++s) {
        auto sc = random_agnostic(rng, 1 + s % 2);
        auto ga = enumerate_glps(sc);
        auto am = build_alphabet(ga, sc.density);
        double total = 0.0;
        for (double q : am.q) {
            total += q;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (int t = 0; t < 1000 / 6 + 1; ++t) {
            std::vector<long long> counts(am.symbols.size(), 0);
            std::vector<long long> direct(ga.d_regions.size(), 0);
            for (int i = 0; i < 25; ++i) {
                double x = u(rng);
                ++counts[am.symbol_of(x)];
                for (std::size_t r = 0; r < ga.d_regions.size(); ++r) {
                    direct[r] += ga.d_regions[r].d.contains(x) ? 1 : 0;
                    direct[r] -= ga.d_regions[r].d_prime.contains(x) ? 1 : 0;
                }
            }
            for (std::size_t r = 0; r < am.a_matrix.size(); ++r) {
                long long via_matrix = 0;
                for (std::size_t c = 0; c < am.a_matrix[r].size(); ++c) {
                    via_matrix += am.a_matrix[r][c] * counts[c];
                }
                CHECK(via_matrix == direct[r]);
            }
        }
    }
}
