#include <doctest.h>

#include <random>

#include "explab/errors.hpp"
#include "explab/piecewise.hpp"
#include "support.hpp"

using namespace explab;
using testing_support::kUnit;

TEST_CASE("measure of intervals under the uniform density") {
    auto mu = Density::uniform(kUnit);
    CHECK(measure(IntervalSet{Interval(0.9, 1.0)}, mu) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(measure(IntervalSet{Interval(0.6, 0.9)}, mu) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(measure(IntervalSet{}, mu) == 0.0);
    CHECK_THROWS_AS(measure(IntervalSet{Interval(0.5, 1.5)}, mu), domain_error);
}

TEST_CASE("measure under a two-piece density") {
    Density mu(kUnit, {0.25}, {2.0, 2.0 / 3.0});
    CHECK(measure(IntervalSet{Interval(0.0, 0.25)}, mu) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(measure(IntervalSet{Interval(0.0, 0.1), Interval(0.5, 1.0)}, mu) ==
          doctest::Approx(0.2 + 1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("disagreement regions") {
    StepFunction g(kUnit, {0.6, 0.9}, 0);
    StepFunction f_opt(kUnit, {0.6}, 0);
    CHECK(disagreement_region(g, f_opt) == IntervalSet{Interval(0.9, 1.0)});
    CHECK(disagreement_region(g, g).empty());
    StepFunction a(kUnit, {0.5}, 0);
    StepFunction b(kUnit, {0.9}, 0);
    CHECK(disagreement_region(a, b) == IntervalSet{Interval(0.5, 0.9)});
    StepFunction other(Interval(0.0, 2.0), {0.5}, 0);
    CHECK_THROWS_AS(disagreement_region(a, other), domain_error);
}

TEST_CASE("set algebra examples") {
    IntervalSet a{Interval(0.1, 0.4)};
    IntervalSet b{Interval(0.3, 0.5)};
    CHECK(intersect(a, b) == IntervalSet{Interval(0.3, 0.4)});
    CHECK(subtract(a, b) == IntervalSet{Interval(0.1, 0.3)});
    CHECK(unite(IntervalSet{Interval(0.0, 0.2)}, IntervalSet{Interval(0.2, 0.5)}) ==
          IntervalSet{Interval(0.0, 0.5)});
    CHECK(unite(IntervalSet{Interval(0.0, 0.2)}, IntervalSet{Interval(0.2, 0.5)}).size() == 1);
    CHECK(set_algebra(SetOp::unite, a, b) == unite(b, a));
}

TEST_CASE("quantile inverts the distribution function") {
    auto uni = Density::uniform(kUnit);
    CHECK(quantile(uni, 0.37) == doctest::Approx(0.37).epsilon(1e-15));
    Density mu(kUnit, {0.25}, {2.0, 2.0 / 3.0});
    CHECK(quantile(mu, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(quantile(mu, 0.0) == 0.0);
    CHECK(quantile(mu, 1.0) == 1.0);
    CHECK_THROWS_AS(quantile(mu, 1.5), argument_error);
    CHECK_THROWS_AS(quantile(mu, -0.1), argument_error);
    for (int i = 0; i <= 1000; ++i) {
        double x = i / 1000.0;
        CHECK(std::abs(quantile(mu, mu.cdf(x)) - x) < 1e-10);
    }
}

TEST_CASE("invalid constructions are rejected") {
    CHECK_THROWS_AS(Interval(0.5, 0.5), domain_error);
    CHECK_THROWS_AS(Density(kUnit, {}, {0.9}), error);
    CHECK_THROWS_AS(Density(kUnit, {0.5}, {2.0, 0.0}), error);
    CHECK_THROWS_AS(StepFunction(kUnit, {0.9, 0.6}, 0), error);
    CHECK_THROWS_AS(StepFunction(kUnit, {1.0}, 0), error);
}

TEST_CASE("property: measure is additive, risk is a symmetric pseudometric") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> count(0, 4);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int trial = 0; trial < 500; ++trial) {
        auto mu = testing_support::random_density(rng);
        CHECK(measure(IntervalSet{kUnit}, mu) == doctest::Approx(1.0).epsilon(1e-12));

        StepFunction f(kUnit, testing_support::random_breaks(rng, count(rng)), bit(rng));
        StepFunction h(kUnit, testing_support::random_breaks(rng, count(rng)), bit(rng));
        StepFunction m(kUnit, testing_support::random_breaks(rng, count(rng)), bit(rng));
        CHECK(disagreement_region(f, h) == disagreement_region(h, f));
        double fh = measure(disagreement_region(f, h), mu);
        double fm = measure(disagreement_region(f, m), mu);
        double mh = measure(disagreement_region(m, h), mu);
        CHECK(fh <= fm + mh + 1e-12);

        // Split a set by another and add the pieces back up.
        auto s = f.support();
        auto t = h.support();
        double whole = measure(s, mu);
        double split = measure(intersect(s, t), mu) + measure(subtract(s, t), mu);
        CHECK(whole == doctest::Approx(split).epsilon(1e-12));
    }
}
