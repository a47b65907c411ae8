#ifndef NETACCESS_BIDS_HPP
#define NETACCESS_BIDS_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace netaccess {

/// quad_coeff * c^2 + lin_coeff * c + const_coeff.
struct QuadraticCurve {
    double quad_coeff = 0.0;
    double lin_coeff = 0.0;
    double const_coeff = 0.0;

    double value(double c) const { return (quad_coeff * c + lin_coeff) * c + const_coeff; }
    double derivative(double c) const { return 2.0 * quad_coeff * c + lin_coeff; }
};

/// Concave piecewise-linear curve given by its knot points; between and
/// beyond knots the curve is the lower envelope of the segment lines.
struct PiecewiseLinearCurve {
    std::vector<double> points_c;  // strictly increasing, points_c[0] = 0
    std::vector<double> points_v;

    double value(double c) const;
    // (slope, intercept) per segment; used for hypograph lowering.
    std::vector<std::pair<double, double>> segments() const;
};

/// One bid/cost component; the auction accepts both representations.
struct ConcaveCurve {
    std::variant<QuadraticCurve, PiecewiseLinearCurve> curve;

    double value(double c) const;
    bool is_quadratic() const { return std::holds_alternative<QuadraticCurve>(curve); }
    const QuadraticCurve& quadratic() const { return std::get<QuadraticCurve>(curve); }
    const PiecewiseLinearCurve& pwl() const { return std::get<PiecewiseLinearCurve>(curve); }
};

/// DERA bid: separable across buses and across injection/withdrawal access.
struct DeraBid {
    std::string dera_id;
    std::vector<int> active_buses;               // 0-based bus indices
    std::vector<ConcaveCurve> injection_curves;  // aligned with active_buses
    std::vector<ConcaveCurve> withdrawal_curves;
    Eigen::VectorXd c_min_injection;   // aligned with active_buses, >= 0
    Eigen::VectorXd c_min_withdrawal;

    double value(const Eigen::VectorXd& c_injection, const Eigen::VectorXd& c_withdrawal) const;
    double value_at_zero() const;  // phi_k(0, 0)
    void validate(int bus_count) const;
};

/// Convex non-decreasing per-bus DSO cost, separable over injection and
/// withdrawal totals.
struct DsoCost {
    std::vector<QuadraticCurve> injection;   // one per bus
    std::vector<QuadraticCurve> withdrawal;

    double value(const Eigen::VectorXd& p_injection, const Eigen::VectorXd& p_withdrawal) const;
    Eigen::VectorXd grad_injection(const Eigen::VectorXd& p_injection) const;
    Eigen::VectorXd grad_withdrawal(const Eigen::VectorXd& p_withdrawal) const;
    void validate(int bus_count) const;

    static DsoCost uniform(int bus_count, const QuadraticCurve& curve);
};

/// Household model behind one point of aggregation. The NEM surplus enters
/// as a supplied scalar; it shifts the DERA's profit but not its decision.
struct ProsumerModel {
    double utility_a = 0.0;     // marginal utility at zero consumption
    double utility_b = 0.0;     // > 0, curvature
    double demand_lower = 0.0;
    double demand_upper = 0.0;
    double renewable = 0.0;
    double nem_surplus = 0.0;
    double surplus_multiplier = 1.01;  // zeta > 1
    double lmp = 0.0;

    void validate() const;
};

/// Capped quadratic utility: a x - (b/2) x^2 for x <= a/b, capped beyond.
double household_utility(double consumption, double a, double b);

struct DeraDecision {
    double d_star = 0.0;      // optimal consumption
    double omega_star = 0.0;  // optimal payment collected from the prosumer
};

/// Closed-form optimum of the profit-maximizing aggregation program with
/// access window  -c_withdrawal <= renewable - d <= c_injection.
DeraDecision optimal_dera_decision(const ProsumerModel& prosumer, double c_withdrawal,
                                   double c_injection);

struct BidCurves {
    double d_hat = 0.0;      // access-unconstrained optimal consumption
    double h = 0.0;          // U(d_hat) - lmp (d_hat - r)
    double q_minus = 0.0;    // injection side active iff renewable >= q_minus
    double q_plus = 0.0;     // withdrawal side active iff renewable < q_plus
    ProsumerModel prosumer;

    double phi_withdrawal(double c_withdrawal) const;
    double phi_injection(double c_injection) const;
    // Full bid value phi(c_wdr, c_inj) including the access-independent part.
    double total(double c_withdrawal, double c_injection) const;
};

BidCurves bid_curves(const ProsumerModel& prosumer);

/// Chord (secant) approximation of a concave quadratic on [0, c_max];
/// underestimates the curve everywhere. knots >= 2 includes both endpoints.
PiecewiseLinearCurve piecewise_linearize(const QuadraticCurve& curve, double c_max, int knots);

}  // namespace netaccess

#endif
