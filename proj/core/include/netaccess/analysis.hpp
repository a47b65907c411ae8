#ifndef NETACCESS_ANALYSIS_HPP
#define NETACCESS_ANALYSIS_HPP

#include "netaccess/robust.hpp"
#include "netaccess/scenarios.hpp"
#include "netaccess/stochastic.hpp"

#include <string>
#include <vector>

namespace netaccess {

/// Fraction of held-out scenarios violating each network row when DERAs
/// transact at the box corner that stresses that row the most.
struct ViolationRates {
    Vec upper;  // per network row
    Vec lower;
    double max_rate() const;
};

ViolationRates violation_rates(const SensitivityModel& sensitivity, const Vec& total_c_injection,
                               const Vec& total_c_withdrawal, const ScenarioSet& held_out);

struct ModeResult {
    std::string mode;  // "robust" | "stochastic" | "deterministic-mean"
    double delta = 0.0;
    Vec total_c_injection;
    Vec total_c_withdrawal;
    Vec price_injection;
    Vec price_withdrawal;
    Vec dera_surplus;
    double dso_surplus = 0.0;
    double social_surplus = 0.0;
    double objective = 0.0;
    ViolationRates violations;
    SolveStatus status = SolveStatus::NumericalFailure;
};

struct ComparisonReport {
    std::vector<ModeResult> modes;

    const ModeResult& by_mode(const std::string& name) const;
};

/// Clears the same network/bids under the robust box, the scenario program,
/// and the scenario program collapsed to the mean scenario, then scores all
/// three on one held-out scenario set.
ComparisonReport compare_modes(const RobustAuctionInstance& robust_instance,
                               const StochasticAuctionInstance& stochastic_instance,
                               const ScenarioSet& held_out, const SolverOptions& options = {});

struct SweepTemplate {
    SensitivityModel sensitivity;
    std::vector<DeraBid> bids;
    DsoCost dso_cost;
    Vec p_max_injection;
    Vec p_max_withdrawal;
    double delta = 0.9;
    Vec mean;                  // per-bus scenario mean
    int scenario_count = 200;
    std::uint64_t seed = 1;
    double truncation_width = 3.0;  // interval mean +/- width * sigma
};

struct SweepRow {
    double sigma;
    double total_access;  // cleared injection + withdrawal access, all buses
    Vec dera_surplus;
    double dso_surplus;
    double social_surplus;
    SolveStatus status;
};

struct SweepSummary {
    std::vector<SweepRow> rows;
    bool access_non_increasing = true;     // with slack, in sigma order
    std::vector<bool> surplus_non_increasing;  // per DERA
};

SweepSummary sigma_sweep(const SweepTemplate& tmpl, const std::vector<double>& sigmas,
                         const SolverOptions& options = {});

}  // namespace netaccess

#endif
