#ifndef NETACCESS_STOCHASTIC_HPP
#define NETACCESS_STOCHASTIC_HPP

#include "netaccess/bids.hpp"
#include "netaccess/network.hpp"
#include "netaccess/robust.hpp"
#include "netaccess/scenarios.hpp"
#include "netaccess/solver.hpp"

#include <string>
#include <vector>

namespace netaccess {

struct StochasticAuctionInstance {
    SensitivityModel sensitivity;
    std::vector<DeraBid> bids;
    DsoCost dso_cost;
    ScenarioSet scenarios;  // signed net injections of DSO customers
    double delta = 0.9;     // risk level of the tail constraints
    Vec p_max_injection;    // per-bus total access caps, applied every scenario
    Vec p_max_withdrawal;

    void validate() const;
};

/// Labels: floor_inj/<k>/<i>, floor_wdr/<k>/<i>, cap_inj/<s>/<i>,
/// cap_wdr/<s>/<i>, couple_inj/<s>/<i>, couple_wdr/<s>/<i>,
/// epi_up/<s>/<m>, epi_lo/<s>/<m>, gpos_up/<s>/<m>, gpos_lo/<s>/<m>,
/// avg_up/<m>, avg_lo/<m>  (all 0-based).
struct StochasticProgram {
    ConvexProgram program;
    int bus_count = 0;
    int dera_count = 0;
    int scenario_count = 0;
    int row_count = 0;  // network rows per direction
};

struct StochasticClearing {
    std::vector<Vec> c_injection;   // per DERA, full bus vectors
    std::vector<Vec> c_withdrawal;
    std::vector<Vec> total_injection;   // per scenario
    std::vector<Vec> total_withdrawal;
    Vec t_upper, t_lower;               // tail thresholds per network row
    std::vector<Vec> gamma_upper, gamma_lower;  // per-scenario excesses
    Vec price_injection;    // LMAP-S: sums of per-scenario equality duals
    Vec price_withdrawal;
    std::vector<Vec> lambda_injection, lambda_withdrawal;  // per scenario
    std::vector<Vec> beta_upper, beta_lower;               // epigraph duals
    std::vector<Vec> omega_injection, omega_withdrawal;    // cap duals
    Vec mu_upper, mu_lower;             // averaged tail-row duals
    std::vector<Vec> eta_injection, eta_withdrawal;        // floor duals
    Vec payments;
    Vec dera_surplus;
    double dso_surplus = 0.0;
    double social_surplus = 0.0;
    double objective = 0.0;
    SolveOutcome outcome;
};

StochasticProgram assemble_stochastic(const StochasticAuctionInstance& instance);

StochasticClearing clear_stochastic(const StochasticAuctionInstance& instance,
                                    const SolverOptions& options = {});

PriceIdentityResiduals lmap_s_identity_check(const StochasticClearing& clearing,
                                             const StochasticAuctionInstance& instance);

std::vector<AncestorPairCheck> stochastic_monotonicity_check(const StochasticClearing& clearing,
                                                             const GraphMatrices& graph,
                                                             double tol = 1e-8);

}  // namespace netaccess

#endif
