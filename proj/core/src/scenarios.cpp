#include "netaccess/scenarios.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace netaccess {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Acklam's rational approximation to the standard normal quantile,
// accurate to ~1e-9 before refinement.
double quantile_estimate(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    double z = quantile_estimate(p);
    // One Halley refinement against the exact CDF.
    const double e = normal_cdf(z) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(z * z / 2.0);
    z = z - u / (1.0 + z * u / 2.0);
    return z;
}

ScenarioSet sample_truncated_normal(const ScenarioSpec& spec, int count, std::uint64_t seed) {
    const int n = static_cast<int>(spec.buses.size());
    if (n == 0) throw std::invalid_argument("scenario spec has no buses");
    if (count < 1) throw std::invalid_argument("scenario count must be >= 1");
    for (const auto& b : spec.buses) {
        if (b.sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
        if (!(b.lower < b.upper) && b.sigma > 0.0)
            throw std::invalid_argument("empty truncation interval");
        if (b.sigma == 0.0 && (b.mean < b.lower || b.mean > b.upper))
            throw std::invalid_argument("degenerate distribution outside its interval");
    }

    ScenarioSet set;
    set.seed = seed;
    set.spec = spec;
    set.scenarios.resize(count, n);

    // Uniform doubles drawn directly from the top 53 bits of the generator,
    // avoiding the implementation-defined std::uniform_real_distribution.
    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    for (int s = 0; s < count; ++s) {
        for (int i = 0; i < n; ++i) {
            const auto& b = spec.buses[static_cast<size_t>(i)];
            const double u = uniform01();
            double value;
            if (b.sigma == 0.0) {
                value = b.mean;
            } else {
                const double lo = normal_cdf((b.lower - b.mean) / b.sigma);
                const double hi = normal_cdf((b.upper - b.mean) / b.sigma);
                const double p = lo + u * (hi - lo);
                value = b.mean + b.sigma * normal_quantile(p);
                value = std::min(std::max(value, b.lower), b.upper);
            }
            set.scenarios(s, i) = value;
        }
    }
    return set;
}

ScenarioSet mean_scenario(const ScenarioSet& set) {
    if (set.count() == 0) throw std::invalid_argument("mean_scenario: empty set");
    ScenarioSet mean;
    mean.seed = set.seed;
    mean.spec = set.spec;
    mean.scenarios = set.scenarios.colwise().mean();
    return mean;
}

}  // namespace netaccess
