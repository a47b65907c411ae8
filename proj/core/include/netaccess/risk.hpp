#ifndef NETACCESS_RISK_HPP
#define NETACCESS_RISK_HPP

#include <Eigen/Dense>
#include <stdexcept>

namespace netaccess {

struct EmpiricalDistribution {
    Eigen::VectorXd samples;  // uniform weights 1/S
};

/// CVaR at level delta in [0,1) under the variational definition
///   min_t  t + E[(X - t)_+] / (1 - delta),
/// evaluated in closed form by the sorted-sample rule. The minimizer is the
/// delta-quantile; a fractional tail index is split across the boundary
/// sample, which keeps the value continuous in delta.
double cvar(const EmpiricalDistribution& dist, double delta);

/// |CVaR[X + a] - CVaR[X] - a|; zero up to roundoff.
double translation_check(const EmpiricalDistribution& dist, double delta, double shift);

/// Fraction of samples strictly above the threshold.
double violation_probability(const Eigen::VectorXd& samples, double threshold);

}  // namespace netaccess

#endif
