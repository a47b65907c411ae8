#ifndef NETACCESS_SCENARIOS_HPP
#define NETACCESS_SCENARIOS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace netaccess {

/// Per-bus truncated-normal parameters for DSO-customer injections.
struct BusDistribution {
    double mean = 0.0;
    double sigma = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct ScenarioSpec {
    std::vector<BusDistribution> buses;
};

struct ScenarioSet {
    Eigen::MatrixXd scenarios;  // S x N, one row per scenario
    std::uint64_t seed = 0;
    ScenarioSpec spec;

    int count() const { return static_cast<int>(scenarios.rows()); }
    int buses() const { return static_cast<int>(scenarios.cols()); }
};

// Standard normal CDF and quantile. The quantile uses a rational
// approximation refined with one Halley step; deterministic across platforms.
double normal_cdf(double z);
double normal_quantile(double p);

/// Inverse-CDF sampling, bit-reproducible for a given (spec, count, seed).
ScenarioSet sample_truncated_normal(const ScenarioSpec& spec, int count, std::uint64_t seed);

/// Element-wise mean of all scenarios, wrapped as a single-scenario set.
ScenarioSet mean_scenario(const ScenarioSet& set);

}  // namespace netaccess

#endif
