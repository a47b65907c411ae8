#include <doctest.h>

#include <netaccess/scenarios.hpp>

#include <cmath>

using namespace netaccess;

TEST_CASE("normal quantile inverts the cdf across the working range") {
    for (double p : {1e-6, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0 - 1e-6}) {
        const double z = normal_quantile(p);
        CHECK(normal_cdf(z) == doctest::Approx(p).epsilon(1e-10));
    }
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("zero-sigma buses reproduce the mean exactly") {
    ScenarioSpec spec;
    spec.buses = {BusDistribution{0.37, 0.0, 0.37, 0.37},
                  BusDistribution{-1.25, 0.0, -1.25, -1.25}};
    ScenarioSet set = sample_truncated_normal(spec, 25, 99);
    for (int s = 0; s < set.count(); ++s) {
        CHECK(set.scenarios(s, 0) == 0.37);
        CHECK(set.scenarios(s, 1) == -1.25);
    }
}

TEST_CASE("samples respect the truncation box") {
    ScenarioSpec spec;
    spec.buses = {BusDistribution{0.0, 1.0, -0.5, 0.75}};
    ScenarioSet set = sample_truncated_normal(spec, 5000, 3);
    CHECK(set.scenarios.minCoeff() >= -0.5);
    CHECK(set.scenarios.maxCoeff() <= 0.75);
}

TEST_CASE("sample mean approaches the distribution mean for a symmetric box") {
    ScenarioSpec spec;
    spec.buses = {BusDistribution{0.2, 0.05, 0.05, 0.35}};
    ScenarioSet set = sample_truncated_normal(spec, 20000, 11);
    // Symmetric truncation keeps the mean; Monte Carlo error ~ sigma/sqrt(S).
    CHECK(set.scenarios.col(0).mean() == doctest::Approx(0.2).epsilon(0.01));
}

TEST_CASE("regeneration with the same seed is bit-identical") {
    ScenarioSpec spec;
    spec.buses = {BusDistribution{0.1, 0.3, -1.0, 1.0}, BusDistribution{-0.2, 0.1, -0.6, 0.2}};
    ScenarioSet a = sample_truncated_normal(spec, 500, 1234);
    ScenarioSet b = sample_truncated_normal(spec, 500, 1234);
    CHECK(a.scenarios == b.scenarios);  // exact bit equality
    ScenarioSet c = sample_truncated_normal(spec, 500, 1235);
    CHECK(a.scenarios != c.scenarios);
}

TEST_CASE("mean scenario collapses the set to one averaged row") {
    ScenarioSpec spec;
    spec.buses = {BusDistribution{0.0, 0.2, -1.0, 1.0}, BusDistribution{0.5, 0.1, 0.0, 1.0}};
    ScenarioSet set = sample_truncated_normal(spec, 400, 8);
    ScenarioSet mean = mean_scenario(set);
    REQUIRE(mean.count() == 1);
    REQUIRE(mean.buses() == 2);
    CHECK(mean.scenarios(0, 0) == doctest::Approx(set.scenarios.col(0).mean()).epsilon(1e-14));
    CHECK(mean.scenarios(0, 1) == doctest::Approx(set.scenarios.col(1).mean()).epsilon(1e-14));
}

TEST_CASE("invalid distribution parameters are rejected") {
    ScenarioSpec spec;
    spec.buses = {BusDistribution{0.0, -0.1, -1.0, 1.0}};
    CHECK_THROWS_AS(sample_truncated_normal(spec, 10, 1), std::invalid_argument);
    spec.buses = {BusDistribution{0.0, 0.1, 1.0, -1.0}};  // empty box
    CHECK_THROWS_AS(sample_truncated_normal(spec, 10, 1), std::invalid_argument);
    spec.buses = {BusDistribution{0.0, 0.1, -1.0, 1.0}};
    CHECK_THROWS_AS(sample_truncated_normal(spec, 0, 1), std::invalid_argument);
}
