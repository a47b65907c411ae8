#include "netaccess/robust.hpp"

#include <algorithm>
#include <cmath>

namespace netaccess {

namespace {

std::string lbl(const std::string& base, int a) { return base + "/" + std::to_string(a); }
std::string lbl(const std::string& base, int a, int b) {
    return base + "/" + std::to_string(a) + "/" + std::to_string(b);
}

void add_bid_objective(ConvexProgram& prog, int block, int local, const ConcaveCurve& curve) {
    if (curve.is_quadratic()) {
        const auto& q = curve.quadratic();
        prog.add_objective_term(block, local, q.quad_coeff, q.lin_coeff);
        prog.add_constant_term(q.const_coeff);
    } else {
        prog.add_pwl_objective(block, local, curve.pwl().segments());
    }
}

}  // namespace

void RobustAuctionInstance::validate() const {
    const int n = sensitivity.buses();
    if (p0_lower.size() != n || p0_upper.size() != n || p_max_injection.size() != n ||
        p_max_withdrawal.size() != n)
        throw std::invalid_argument("instance vectors must have one entry per bus");
    if ((p0_lower.array() < 0.0).any() || (p0_upper.array() < 0.0).any() ||
        (p_max_injection.array() < 0.0).any() || (p_max_withdrawal.array() < 0.0).any())
        throw std::invalid_argument("capacity parameters must be nonnegative");
    dso_cost.validate(n);
    for (const auto& bid : bids) bid.validate(n);

    // Feasibility of floors against the total caps, named per bus.
    Vec floor_inj = p0_upper, floor_wdr = p0_lower;
    for (const auto& bid : bids)
        for (size_t a = 0; a < bid.active_buses.size(); ++a) {
            floor_inj(bid.active_buses[a]) += bid.c_min_injection(static_cast<Eigen::Index>(a));
            floor_wdr(bid.active_buses[a]) += bid.c_min_withdrawal(static_cast<Eigen::Index>(a));
        }
    for (int i = 0; i < n; ++i) {
        if (floor_inj(i) > p_max_injection(i) + 1e-12)
            throw std::invalid_argument("minimum injection access exceeds the cap at bus " +
                                        std::to_string(i + 1));
        if (floor_wdr(i) > p_max_withdrawal(i) + 1e-12)
            throw std::invalid_argument("minimum withdrawal access exceeds the cap at bus " +
                                        std::to_string(i + 1));
    }
}

RobustProgram assemble_robust(const RobustAuctionInstance& instance) {
    instance.validate();
    const int n = instance.sensitivity.buses();
    const int m = instance.sensitivity.rows();
    const int k_count = static_cast<int>(instance.bids.size());

    RobustProgram rp;
    rp.bus_count = n;
    rp.dera_count = k_count;
    ConvexProgram& prog = rp.program;

    std::vector<int> cinj_block(static_cast<size_t>(k_count)), cwdr_block(static_cast<size_t>(k_count));
    for (int k = 0; k < k_count; ++k) {
        const auto& bid = instance.bids[static_cast<size_t>(k)];
        const int dim = static_cast<int>(bid.active_buses.size());
        cinj_block[static_cast<size_t>(k)] = prog.add_block("Cinj/" + std::to_string(k), dim);
        cwdr_block[static_cast<size_t>(k)] = prog.add_block("Cwdr/" + std::to_string(k), dim);
    }
    const int pinj = prog.add_block("Pinj", n);
    const int pwdr = prog.add_block("Pwdr", n);

    // Objective: sum of bids minus DSO cost.
    for (int k = 0; k < k_count; ++k) {
        const auto& bid = instance.bids[static_cast<size_t>(k)];
        for (size_t a = 0; a < bid.active_buses.size(); ++a) {
            add_bid_objective(prog, cinj_block[static_cast<size_t>(k)], static_cast<int>(a),
                              bid.injection_curves[a]);
            add_bid_objective(prog, cwdr_block[static_cast<size_t>(k)], static_cast<int>(a),
                              bid.withdrawal_curves[a]);
        }
    }
    for (int i = 0; i < n; ++i) {
        const auto& ci = instance.dso_cost.injection[static_cast<size_t>(i)];
        const auto& cw = instance.dso_cost.withdrawal[static_cast<size_t>(i)];
        prog.add_objective_term(pinj, i, -ci.quad_coeff, -ci.lin_coeff);
        prog.add_objective_term(pwdr, i, -cw.quad_coeff, -cw.lin_coeff);
        prog.add_constant_term(-ci.const_coeff - cw.const_coeff);
    }

    // Floors (duals eta >= 0):  -C <= -Cmin.
    for (int k = 0; k < k_count; ++k) {
        const auto& bid = instance.bids[static_cast<size_t>(k)];
        for (size_t a = 0; a < bid.active_buses.size(); ++a) {
            const int i = bid.active_buses[a];
            prog.add_constraint(lbl("floor_inj", k, i),
                                {{cinj_block[static_cast<size_t>(k)], static_cast<int>(a), -1.0}},
                                Relation::LessEqual, -bid.c_min_injection(static_cast<Eigen::Index>(a)));
            prog.add_constraint(lbl("floor_wdr", k, i),
                                {{cwdr_block[static_cast<size_t>(k)], static_cast<int>(a), -1.0}},
                                Relation::LessEqual, -bid.c_min_withdrawal(static_cast<Eigen::Index>(a)));
        }
    }
    // Caps (duals omega >= 0).
    for (int i = 0; i < n; ++i) {
        prog.add_constraint(lbl("cap_inj", i), {{pinj, i, 1.0}}, Relation::LessEqual,
                            instance.p_max_injection(i));
        prog.add_constraint(lbl("cap_wdr", i), {{pwdr, i, 1.0}}, Relation::LessEqual,
                            instance.p_max_withdrawal(i));
    }
    // Coupling equalities (duals are the LMAP-R prices):
    //   sum_k C_k - P = -p0  per bus.
    for (int i = 0; i < n; ++i) {
        std::vector<LinearTerm> inj_terms, wdr_terms;
        for (int k = 0; k < k_count; ++k) {
            const auto& bid = instance.bids[static_cast<size_t>(k)];
            for (size_t a = 0; a < bid.active_buses.size(); ++a)
                if (bid.active_buses[a] == i) {
                    inj_terms.push_back({cinj_block[static_cast<size_t>(k)], static_cast<int>(a), 1.0});
                    wdr_terms.push_back({cwdr_block[static_cast<size_t>(k)], static_cast<int>(a), 1.0});
                }
        }
        inj_terms.push_back({pinj, i, -1.0});
        wdr_terms.push_back({pwdr, i, -1.0});
        prog.add_constraint(lbl("couple_inj", i), std::move(inj_terms), Relation::Equal,
                            -instance.p0_upper(i));
        prog.add_constraint(lbl("couple_wdr", i), std::move(wdr_terms), Relation::Equal,
                            -instance.p0_lower(i));
    }
    // Reformulated network rows:  A+ P_inj + A- P_wdr <= b_hi  and
    //   A+ P_wdr + A- P_inj <= -b_lo.
    const auto& sm = instance.sensitivity;
    for (int r = 0; r < m; ++r) {
        std::vector<LinearTerm> up, lo;
        for (int i = 0; i < n; ++i) {
            if (sm.a_plus(r, i) != 0.0) {
                up.push_back({pinj, i, sm.a_plus(r, i)});
                lo.push_back({pwdr, i, sm.a_plus(r, i)});
            }
            if (sm.a_minus(r, i) != 0.0) {
                up.push_back({pwdr, i, sm.a_minus(r, i)});
                lo.push_back({pinj, i, sm.a_minus(r, i)});
            }
        }
        prog.add_constraint(lbl("net_up", r), std::move(up), Relation::LessEqual, sm.upper_bound(r));
        prog.add_constraint(lbl("net_lo", r), std::move(lo), Relation::LessEqual, -sm.lower_bound(r));
    }
    return rp;
}

RobustClearing clear_robust(const RobustAuctionInstance& instance, const SolverOptions& options) {
    RobustProgram rp = assemble_robust(instance);
    const int n = rp.bus_count;
    const int m = instance.sensitivity.rows();
    const int k_count = rp.dera_count;

    RobustClearing clr;
    clr.outcome = solve(rp.program, options);
    if (clr.outcome.status != SolveStatus::Optimal) return clr;
    const auto& prog = rp.program;
    const auto& out = clr.outcome;

    clr.c_injection.assign(static_cast<size_t>(k_count), Vec::Zero(n));
    clr.c_withdrawal.assign(static_cast<size_t>(k_count), Vec::Zero(n));
    clr.eta_injection.assign(static_cast<size_t>(k_count), Vec::Zero(n));
    clr.eta_withdrawal.assign(static_cast<size_t>(k_count), Vec::Zero(n));
    for (int k = 0; k < k_count; ++k) {
        const auto& bid = instance.bids[static_cast<size_t>(k)];
        const auto& ci = out.primal[static_cast<size_t>(prog.block_id("Cinj/" + std::to_string(k)))];
        const auto& cw = out.primal[static_cast<size_t>(prog.block_id("Cwdr/" + std::to_string(k)))];
        for (size_t a = 0; a < bid.active_buses.size(); ++a) {
            const int i = bid.active_buses[a];
            clr.c_injection[static_cast<size_t>(k)](i) = ci(static_cast<Eigen::Index>(a));
            clr.c_withdrawal[static_cast<size_t>(k)](i) = cw(static_cast<Eigen::Index>(a));
            clr.eta_injection[static_cast<size_t>(k)](i) = out.dual(prog, lbl("floor_inj", k, i));
            clr.eta_withdrawal[static_cast<size_t>(k)](i) = out.dual(prog, lbl("floor_wdr", k, i));
        }
    }
    clr.total_injection = out.primal[static_cast<size_t>(prog.block_id("Pinj"))];
    clr.total_withdrawal = out.primal[static_cast<size_t>(prog.block_id("Pwdr"))];

    clr.price_injection = Vec(n);
    clr.price_withdrawal = Vec(n);
    clr.omega_injection = Vec(n);
    clr.omega_withdrawal = Vec(n);
    for (int i = 0; i < n; ++i) {
        clr.price_injection(i) = out.dual(prog, lbl("couple_inj", i));
        clr.price_withdrawal(i) = out.dual(prog, lbl("couple_wdr", i));
        clr.omega_injection(i) = out.dual(prog, lbl("cap_inj", i));
        clr.omega_withdrawal(i) = out.dual(prog, lbl("cap_wdr", i));
    }
    clr.mu_upper = Vec(m);
    clr.mu_lower = Vec(m);
    for (int r = 0; r < m; ++r) {
        clr.mu_upper(r) = out.dual(prog, lbl("net_up", r));
        clr.mu_lower(r) = out.dual(prog, lbl("net_lo", r));
    }

    clr.payments = Vec(k_count);
    clr.dera_surplus = Vec(k_count);
    for (int k = 0; k < k_count; ++k) {
        const auto& bid = instance.bids[static_cast<size_t>(k)];
        clr.payments(k) = clr.price_injection.dot(clr.c_injection[static_cast<size_t>(k)]) +
                          clr.price_withdrawal.dot(clr.c_withdrawal[static_cast<size_t>(k)]);
        Vec ci(static_cast<Eigen::Index>(bid.active_buses.size()));
        Vec cw(static_cast<Eigen::Index>(bid.active_buses.size()));
        for (size_t a = 0; a < bid.active_buses.size(); ++a) {
            ci(static_cast<Eigen::Index>(a)) = clr.c_injection[static_cast<size_t>(k)](bid.active_buses[a]);
            cw(static_cast<Eigen::Index>(a)) = clr.c_withdrawal[static_cast<size_t>(k)](bid.active_buses[a]);
        }
        clr.dera_surplus(k) = bid.value(ci, cw) - clr.payments(k);
    }
    const double cost_delta =
        instance.dso_cost.value(clr.total_injection, clr.total_withdrawal) -
        instance.dso_cost.value(instance.p0_upper, instance.p0_lower);
    clr.dso_surplus = clr.payments.sum() - cost_delta;
    clr.social_surplus = clr.dso_surplus + clr.dera_surplus.sum();
    clr.objective = out.objective_value;
    return clr;
}

double PriceIdentityResiduals::max_residual() const {
    double r = 0.0;
    if (injection.size()) r = injection.cwiseAbs().maxCoeff();
    if (withdrawal.size()) r = std::max(r, withdrawal.cwiseAbs().maxCoeff());
    return r;
}

PriceIdentityResiduals lmap_r_identity_check(const RobustClearing& clearing,
                                             const RobustAuctionInstance& instance) {
    const auto& sm = instance.sensitivity;
    Vec grad_inj = instance.dso_cost.grad_injection(clearing.total_injection);
    Vec grad_wdr = instance.dso_cost.grad_withdrawal(clearing.total_withdrawal);
    PriceIdentityResiduals res;
    res.injection = clearing.price_injection - grad_inj -
                    sm.a_plus.transpose() * clearing.mu_upper -
                    sm.a_minus.transpose() * clearing.mu_lower - clearing.omega_injection;
    res.withdrawal = clearing.price_withdrawal - grad_wdr -
                     sm.a_minus.transpose() * clearing.mu_upper -
                     sm.a_plus.transpose() * clearing.mu_lower - clearing.omega_withdrawal;
    return res;
}

std::vector<AncestorPairCheck> monotonicity_check(const Vec& price_injection,
                                                  const Vec& price_withdrawal,
                                                  const GraphMatrices& graph, double tol) {
    const int n = static_cast<int>(graph.parent.size());
    std::vector<AncestorPairCheck> checks;
    for (int anc = 0; anc < n; ++anc)
        for (int desc = 1; desc < n; ++desc) {
            if (anc == desc || !graph.is_ancestor(anc, desc)) continue;
            const bool ok = price_injection(desc) >= price_injection(anc) - tol &&
                            price_withdrawal(desc) >= price_withdrawal(anc) - tol;
            checks.push_back({anc, desc, ok});
        }
    return checks;
}

SurplusReport surplus_report(const RobustClearing& clearing,
                             const RobustAuctionInstance& instance) {
    SurplusReport rep;
    rep.dso_surplus = clearing.dso_surplus;
    rep.dera_surplus = clearing.dera_surplus;
    rep.social_surplus = clearing.social_surplus;
    for (size_t k = 0; k < instance.bids.size(); ++k) {
        const auto& bid = instance.bids[k];
        DeraSurplusFlags f;
        f.bid_at_zero_nonneg = bid.value_at_zero() >= 0.0;
        f.floors_zero = bid.c_min_injection.isZero(0.0) && bid.c_min_withdrawal.isZero(0.0);
        f.floors_slack = true;
        for (size_t a = 0; a < bid.active_buses.size(); ++a) {
            const int i = bid.active_buses[a];
            if (clearing.c_injection[k](i) - bid.c_min_injection(static_cast<Eigen::Index>(a)) <= 1e-6 ||
                clearing.c_withdrawal[k](i) - bid.c_min_withdrawal(static_cast<Eigen::Index>(a)) <= 1e-6)
                f.floors_slack = false;
        }
        rep.flags.push_back(f);
    }
    return rep;
}

}  // namespace netaccess
