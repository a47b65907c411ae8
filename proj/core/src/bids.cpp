#include "netaccess/bids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netaccess {

double PiecewiseLinearCurve::value(double c) const {
    if (points_c.size() < 2) throw std::invalid_argument("pwl curve needs >= 2 points");
    double v = std::numeric_limits<double>::infinity();
    for (auto [slope, intercept] : segments())
        v = std::min(v, slope * c + intercept);
    return v;
}

std::vector<std::pair<double, double>> PiecewiseLinearCurve::segments() const {
    std::vector<std::pair<double, double>> segs;
    for (size_t j = 0; j + 1 < points_c.size(); ++j) {
        const double dc = points_c[j + 1] - points_c[j];
        if (dc <= 0.0) throw std::invalid_argument("pwl knots must be strictly increasing");
        const double slope = (points_v[j + 1] - points_v[j]) / dc;
        segs.push_back({slope, points_v[j] - slope * points_c[j]});
    }
    return segs;
}

double ConcaveCurve::value(double c) const {
    return std::visit([c](const auto& cv) { return cv.value(c); }, curve);
}

double DeraBid::value(const Eigen::VectorXd& c_injection, const Eigen::VectorXd& c_withdrawal) const {
    double total = 0.0;
    for (size_t i = 0; i < active_buses.size(); ++i) {
        total += injection_curves[i].value(c_injection(static_cast<Eigen::Index>(i)));
        total += withdrawal_curves[i].value(c_withdrawal(static_cast<Eigen::Index>(i)));
    }
    return total;
}

double DeraBid::value_at_zero() const {
    double total = 0.0;
    for (size_t i = 0; i < active_buses.size(); ++i)
        total += injection_curves[i].value(0.0) + withdrawal_curves[i].value(0.0);
    return total;
}

void DeraBid::validate(int bus_count) const {
    const auto n = active_buses.size();
    if (injection_curves.size() != n || withdrawal_curves.size() != n ||
        c_min_injection.size() != static_cast<Eigen::Index>(n) ||
        c_min_withdrawal.size() != static_cast<Eigen::Index>(n))
        throw std::invalid_argument("bid '" + dera_id + "': per-bus fields must align with active_buses");
    for (int b : active_buses)
        if (b < 0 || b >= bus_count)
            throw std::invalid_argument("bid '" + dera_id + "': bus index out of range");
    if ((c_min_injection.array() < 0.0).any() || (c_min_withdrawal.array() < 0.0).any())
        throw std::invalid_argument("bid '" + dera_id + "': minimum access must be nonnegative");
    auto check_concave = [this](const ConcaveCurve& cv) {
        if (cv.is_quadratic() && cv.quadratic().quad_coeff > 0.0)
            throw std::invalid_argument("bid '" + dera_id + "': bid component must be concave");
        if (!cv.is_quadratic()) {
            auto segs = cv.pwl().segments();
            for (size_t j = 0; j + 1 < segs.size(); ++j)
                if (segs[j].first < segs[j + 1].first - 1e-12)
                    throw std::invalid_argument("bid '" + dera_id + "': pwl component must be concave");
        }
    };
    for (const auto& cv : injection_curves) check_concave(cv);
    for (const auto& cv : withdrawal_curves) check_concave(cv);
}

double DsoCost::value(const Eigen::VectorXd& p_injection, const Eigen::VectorXd& p_withdrawal) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < p_injection.size(); ++i)
        total += injection[static_cast<size_t>(i)].value(p_injection(i));
    for (Eigen::Index i = 0; i < p_withdrawal.size(); ++i)
        total += withdrawal[static_cast<size_t>(i)].value(p_withdrawal(i));
    return total;
}

Eigen::VectorXd DsoCost::grad_injection(const Eigen::VectorXd& p_injection) const {
    Eigen::VectorXd g(p_injection.size());
    for (Eigen::Index i = 0; i < g.size(); ++i)
        g(i) = injection[static_cast<size_t>(i)].derivative(p_injection(i));
    return g;
}

Eigen::VectorXd DsoCost::grad_withdrawal(const Eigen::VectorXd& p_withdrawal) const {
    Eigen::VectorXd g(p_withdrawal.size());
    for (Eigen::Index i = 0; i < g.size(); ++i)
        g(i) = withdrawal[static_cast<size_t>(i)].derivative(p_withdrawal(i));
    return g;
}

void DsoCost::validate(int bus_count) const {
    if (injection.size() != static_cast<size_t>(bus_count) ||
        withdrawal.size() != static_cast<size_t>(bus_count))
        throw std::invalid_argument("DSO cost must have one curve per bus");
    for (const auto* side : {&injection, &withdrawal})
        for (const auto& c : *side)
            if (c.quad_coeff < 0.0 || c.lin_coeff < 0.0)
                throw std::invalid_argument("DSO cost curves must be convex non-decreasing");
}

DsoCost DsoCost::uniform(int bus_count, const QuadraticCurve& curve) {
    DsoCost cost;
    cost.injection.assign(static_cast<size_t>(bus_count), curve);
    cost.withdrawal.assign(static_cast<size_t>(bus_count), curve);
    return cost;
}

void ProsumerModel::validate() const {
    if (utility_b <= 0.0) throw std::invalid_argument("utility curvature must be positive");
    if (demand_lower > demand_upper) throw std::invalid_argument("demand bounds inverted");
    if (surplus_multiplier <= 1.0) throw std::invalid_argument("surplus multiplier must exceed 1");
}

double household_utility(double consumption, double a, double b) {
    if (consumption < 0.0) throw std::domain_error("consumption must be nonnegative");
    const double sat = a / b;
    if (consumption <= sat) return a * consumption - 0.5 * b * consumption * consumption;
    return a * a / (2.0 * b);
}

namespace {

double utility(const ProsumerModel& m, double d) {
    return household_utility(std::max(d, 0.0), m.utility_a, m.utility_b);
}

// Access-unconstrained optimal consumption: marginal utility meets the LMP,
// clamped to the demand bounds.
double d_hat_of(const ProsumerModel& m) {
    const double stationary = (m.utility_a - m.lmp) / m.utility_b;
    return std::min(m.demand_upper, std::max(stationary, m.demand_lower));
}

}  // namespace

DeraDecision optimal_dera_decision(const ProsumerModel& prosumer, double c_withdrawal,
                                   double c_injection) {
    prosumer.validate();
    if (c_withdrawal < 0.0 || c_injection < 0.0)
        throw std::invalid_argument("access limits must be nonnegative");
    const double d_hat = d_hat_of(prosumer);
    // Access window on consumption: r - d in [-c_withdrawal, c_injection].
    const double d_star = std::min(prosumer.renewable + c_withdrawal,
                                   std::max(d_hat, prosumer.renewable - c_injection));
    DeraDecision dec;
    dec.d_star = d_star;
    dec.omega_star = utility(prosumer, d_star) -
                     prosumer.surplus_multiplier * prosumer.nem_surplus;
    return dec;
}

double BidCurves::phi_withdrawal(double c_withdrawal) const {
    const double r = prosumer.renewable;
    // Access beyond what it takes to reach the unconstrained optimum adds no
    // value: the curve plateaus there.
    const double useful = std::min(c_withdrawal, std::max(d_hat - r, 0.0));
    return utility(prosumer, r + useful) - prosumer.lmp * useful - h;
}

double BidCurves::phi_injection(double c_injection) const {
    const double r = prosumer.renewable;
    const double useful = std::min(c_injection, std::max(r - d_hat, 0.0));
    return utility(prosumer, r - useful) + prosumer.lmp * useful - h;
}

double BidCurves::total(double c_withdrawal, double c_injection) const {
    return phi_withdrawal(c_withdrawal) + phi_injection(c_injection) + h -
           prosumer.surplus_multiplier * prosumer.nem_surplus;
}

BidCurves bid_curves(const ProsumerModel& prosumer) {
    prosumer.validate();
    BidCurves bc;
    bc.prosumer = prosumer;
    bc.d_hat = d_hat_of(prosumer);
    // Normalize both components to zero at zero access: h is the prosumer's
    // islanded surplus, so each curve prices only the gain access provides.
    bc.h = utility(prosumer, prosumer.renewable);
    // Thresholds on the renewable level at zero access: the withdrawal side
    // is active for r below d_hat, the injection side for r above it.
    bc.q_plus = bc.d_hat;
    bc.q_minus = bc.d_hat;
    return bc;
}

PiecewiseLinearCurve piecewise_linearize(const QuadraticCurve& curve, double c_max, int knots) {
    if (curve.quad_coeff > 0.0)
        throw std::invalid_argument("piecewise_linearize: curve must be concave");
    if (knots < 2) throw std::invalid_argument("piecewise_linearize: need at least 2 knots");
    if (c_max <= 0.0) throw std::invalid_argument("piecewise_linearize: c_max must be positive");
    PiecewiseLinearCurve pwl;
    pwl.points_c.resize(static_cast<size_t>(knots));
    pwl.points_v.resize(static_cast<size_t>(knots));
    for (int j = 0; j < knots; ++j) {
        const double c = c_max * static_cast<double>(j) / static_cast<double>(knots - 1);
        pwl.points_c[static_cast<size_t>(j)] = c;
        pwl.points_v[static_cast<size_t>(j)] = curve.value(c);
    }
    return pwl;
}

}  // namespace netaccess
