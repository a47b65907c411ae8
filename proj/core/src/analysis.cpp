#include "netaccess/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace netaccess {

double ViolationRates::max_rate() const {
    double r = 0.0;
    if (upper.size()) r = upper.maxCoeff();
    if (lower.size()) r = std::max(r, lower.maxCoeff());
    return r;
}

ViolationRates violation_rates(const SensitivityModel& sensitivity, const Vec& total_c_injection,
                               const Vec& total_c_withdrawal, const ScenarioSet& held_out) {
    const int m = sensitivity.rows();
    const int s_count = held_out.count();
    if (held_out.buses() != sensitivity.buses())
        throw std::invalid_argument("held-out scenarios do not match the bus count");
    // Worst-case DERA contribution per row over the cleared box.
    const Vec worst_up = sensitivity.a_plus * total_c_injection +
                         sensitivity.a_minus * total_c_withdrawal;
    const Vec worst_lo = sensitivity.a_plus * total_c_withdrawal +
                         sensitivity.a_minus * total_c_injection;
    ViolationRates rates;
    rates.upper = Vec::Zero(m);
    rates.lower = Vec::Zero(m);
    for (int s = 0; s < s_count; ++s) {
        const Vec flow = sensitivity.a_matrix * held_out.scenarios.row(s).transpose();
        for (int r = 0; r < m; ++r) {
            if (worst_up(r) + flow(r) > sensitivity.upper_bound(r)) rates.upper(r) += 1.0;
            if (worst_lo(r) - flow(r) > -sensitivity.lower_bound(r)) rates.lower(r) += 1.0;
        }
    }
    rates.upper /= static_cast<double>(s_count);
    rates.lower /= static_cast<double>(s_count);
    return rates;
}

const ModeResult& ComparisonReport::by_mode(const std::string& name) const {
    for (const auto& mr : modes)
        if (mr.mode == name) return mr;
    throw std::out_of_range("no mode named '" + name + "' in report");
}

namespace {

Vec sum_allocations(const std::vector<Vec>& per_dera, int n) {
    Vec total = Vec::Zero(n);
    for (const auto& v : per_dera) total += v;
    return total;
}

}  // namespace

ComparisonReport compare_modes(const RobustAuctionInstance& robust_instance,
                               const StochasticAuctionInstance& stochastic_instance,
                               const ScenarioSet& held_out, const SolverOptions& options) {
    const int n = robust_instance.sensitivity.buses();
    if (stochastic_instance.sensitivity.buses() != n)
        throw std::invalid_argument("modes must share one network");
    ComparisonReport report;

    {
        RobustClearing clr = clear_robust(robust_instance, options);
        ModeResult mr;
        mr.mode = "robust";
        mr.status = clr.outcome.status;
        if (clr.outcome.status == SolveStatus::Optimal) {
            mr.total_c_injection = sum_allocations(clr.c_injection, n);
            mr.total_c_withdrawal = sum_allocations(clr.c_withdrawal, n);
            mr.price_injection = clr.price_injection;
            mr.price_withdrawal = clr.price_withdrawal;
            mr.dera_surplus = clr.dera_surplus;
            mr.dso_surplus = clr.dso_surplus;
            mr.social_surplus = clr.social_surplus;
            mr.objective = clr.objective;
            mr.violations = violation_rates(robust_instance.sensitivity, mr.total_c_injection,
                                            mr.total_c_withdrawal, held_out);
        }
        report.modes.push_back(std::move(mr));
    }

    auto run_stochastic = [&](const std::string& name, const ScenarioSet& set) {
        StochasticAuctionInstance inst = stochastic_instance;
        inst.scenarios = set;
        StochasticClearing clr = clear_stochastic(inst, options);
        ModeResult mr;
        mr.mode = name;
        mr.delta = inst.delta;
        mr.status = clr.outcome.status;
        if (clr.outcome.status == SolveStatus::Optimal) {
            mr.total_c_injection = sum_allocations(clr.c_injection, n);
            mr.total_c_withdrawal = sum_allocations(clr.c_withdrawal, n);
            mr.price_injection = clr.price_injection;
            mr.price_withdrawal = clr.price_withdrawal;
            mr.dera_surplus = clr.dera_surplus;
            mr.dso_surplus = clr.dso_surplus;
            mr.social_surplus = clr.social_surplus;
            mr.objective = clr.objective;
            mr.violations = violation_rates(inst.sensitivity, mr.total_c_injection,
                                            mr.total_c_withdrawal, held_out);
        }
        report.modes.push_back(std::move(mr));
    };

    run_stochastic("stochastic", stochastic_instance.scenarios);
    run_stochastic("deterministic-mean", mean_scenario(stochastic_instance.scenarios));
    return report;
}

SweepSummary sigma_sweep(const SweepTemplate& tmpl, const std::vector<double>& sigmas,
                         const SolverOptions& options) {
    if (sigmas.empty()) throw std::invalid_argument("sigma sweep needs at least one sigma");
    const int n = tmpl.sensitivity.buses();
    if (tmpl.mean.size() != n) throw std::invalid_argument("sweep mean must have one entry per bus");

    SweepSummary summary;
    for (double sigma : sigmas) {
        if (sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
        ScenarioSpec spec;
        spec.buses.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto& b = spec.buses[static_cast<size_t>(i)];
            b.mean = tmpl.mean(i);
            b.sigma = sigma;
            b.lower = b.mean - tmpl.truncation_width * sigma;
            b.upper = b.mean + tmpl.truncation_width * sigma;
        }
        StochasticAuctionInstance inst;
        inst.sensitivity = tmpl.sensitivity;
        inst.bids = tmpl.bids;
        inst.dso_cost = tmpl.dso_cost;
        inst.delta = tmpl.delta;
        inst.p_max_injection = tmpl.p_max_injection;
        inst.p_max_withdrawal = tmpl.p_max_withdrawal;
        inst.scenarios = sample_truncated_normal(spec, tmpl.scenario_count, tmpl.seed);
        StochasticClearing clr = clear_stochastic(inst, options);

        SweepRow row;
        row.sigma = sigma;
        row.status = clr.outcome.status;
        row.total_access = 0.0;
        row.dso_surplus = 0.0;
        row.social_surplus = 0.0;
        if (clr.outcome.status == SolveStatus::Optimal) {
            for (const auto& v : clr.c_injection) row.total_access += v.sum();
            for (const auto& v : clr.c_withdrawal) row.total_access += v.sum();
            row.dera_surplus = clr.dera_surplus;
            row.dso_surplus = clr.dso_surplus;
            row.social_surplus = clr.social_surplus;
        }
        summary.rows.push_back(std::move(row));
    }

    const double slack = 1e-8;
    for (size_t j = 1; j < summary.rows.size(); ++j)
        if (summary.rows[j].total_access > summary.rows[j - 1].total_access + slack)
            summary.access_non_increasing = false;
    const Eigen::Index k_count = summary.rows.front().dera_surplus.size();
    summary.surplus_non_increasing.assign(static_cast<size_t>(k_count), true);
    for (Eigen::Index k = 0; k < k_count; ++k)
        for (size_t j = 1; j < summary.rows.size(); ++j) {
            if (summary.rows[j].dera_surplus.size() != k_count ||
                summary.rows[j - 1].dera_surplus.size() != k_count)
                continue;
            if (summary.rows[j].dera_surplus(k) > summary.rows[j - 1].dera_surplus(k) + slack)
                summary.surplus_non_increasing[static_cast<size_t>(k)] = false;
        }
    return summary;
}

}  // namespace netaccess
