#ifndef NETACCESS_ROBUST_HPP
#define NETACCESS_ROBUST_HPP

#include "netaccess/bids.hpp"
#include "netaccess/network.hpp"
#include "netaccess/solver.hpp"

#include <string>
#include <vector>

namespace netaccess {

struct RobustAuctionInstance {
    SensitivityModel sensitivity;
    std::vector<DeraBid> bids;
    DsoCost dso_cost;
    Vec p0_lower;           // withdrawal magnitude of DSO customers, >= 0
    Vec p0_upper;           // injection magnitude, >= 0
    Vec p_max_injection;    // per-bus total access cap
    Vec p_max_withdrawal;

    void validate() const;
};

/// Assembled program plus the label conventions used for dual extraction.
/// Labels: floor_inj/<k>/<i>, floor_wdr/<k>/<i>, cap_inj/<i>, cap_wdr/<i>,
/// couple_inj/<i>, couple_wdr/<i>, net_up/<m>, net_lo/<m>  (all 0-based).
struct RobustProgram {
    ConvexProgram program;
    int bus_count = 0;
    int dera_count = 0;
};

struct RobustClearing {
    // Allocations expanded to full bus vectors (zero on inactive buses).
    std::vector<Vec> c_injection;
    std::vector<Vec> c_withdrawal;
    Vec total_injection;   // P-bar*
    Vec total_withdrawal;  // P-underbar*
    Vec price_injection;   // LMAP-R lambda-bar*
    Vec price_withdrawal;
    Vec mu_upper, mu_lower;            // network-row duals
    Vec omega_injection, omega_withdrawal;  // cap duals
    std::vector<Vec> eta_injection, eta_withdrawal;  // floor duals
    Vec payments;       // per DERA
    Vec dera_surplus;
    double dso_surplus = 0.0;
    double social_surplus = 0.0;
    double objective = 0.0;
    SolveOutcome outcome;
};

RobustProgram assemble_robust(const RobustAuctionInstance& instance);

RobustClearing clear_robust(const RobustAuctionInstance& instance,
                            const SolverOptions& options = {});

/// Residuals of the price identity lambda = grad J + A+^T mu_up + A-^T mu_lo + omega,
/// one entry per bus for each price vector.
struct PriceIdentityResiduals {
    Vec injection;
    Vec withdrawal;
    double max_residual() const;
};

PriceIdentityResiduals lmap_r_identity_check(const RobustClearing& clearing,
                                             const RobustAuctionInstance& instance);

struct AncestorPairCheck {
    int ancestor;
    int descendant;
    bool ok;  // descendant price >= ancestor price - tol on both vectors
};

/// Prices must not decrease moving away from the substation.
std::vector<AncestorPairCheck> monotonicity_check(const Vec& price_injection,
                                                  const Vec& price_withdrawal,
                                                  const GraphMatrices& graph,
                                                  double tol = 1e-8);

struct DeraSurplusFlags {
    bool bid_at_zero_nonneg;
    bool floors_zero;
    bool floors_slack;  // strictly non-binding at optimum by > 1e-6
};

struct SurplusReport {
    double dso_surplus;
    Vec dera_surplus;
    double social_surplus;
    std::vector<DeraSurplusFlags> flags;
};

SurplusReport surplus_report(const RobustClearing& clearing,
                             const RobustAuctionInstance& instance);

}  // namespace netaccess

#endif
