#include "netaccess/risk.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace netaccess {

double cvar(const EmpiricalDistribution& dist, double delta) {
    const Eigen::Index s = dist.samples.size();
    if (s < 1) throw std::invalid_argument("cvar: empty distribution");
    if (!(delta >= 0.0 && delta < 1.0))
        throw std::domain_error("cvar: risk level must lie in [0, 1)");

    std::vector<double> sorted(dist.samples.data(), dist.samples.data() + s);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());

    // Tail mass m = S (1 - delta) samples; the fractional remainder takes a
    // partial weight on the next sample (Rockafellar-Uryasev split rule).
    const double m = static_cast<double>(s) * (1.0 - delta);
    const Eigen::Index whole = static_cast<Eigen::Index>(std::floor(m));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < whole; ++i) acc += sorted[static_cast<size_t>(i)];
    const double frac = m - static_cast<double>(whole);
    if (frac > 0.0 && whole < s) acc += frac * sorted[static_cast<size_t>(whole)];
    return acc / m;
}

double translation_check(const EmpiricalDistribution& dist, double delta, double shift) {
    EmpiricalDistribution shifted{dist.samples.array() + shift};
    return std::abs(cvar(shifted, delta) - cvar(dist, delta) - shift);
}

double violation_probability(const Eigen::VectorXd& samples, double threshold) {
    if (samples.size() == 0) throw std::invalid_argument("violation_probability: empty samples");
    return static_cast<double>((samples.array() > threshold).count()) /
           static_cast<double>(samples.size());
}

}  // namespace netaccess
