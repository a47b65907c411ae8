#include "netaccess/stochastic.hpp"

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

void StochasticAuctionInstance::validate() const {
    const int n = sensitivity.buses();
    if (delta < 0.0 || delta >= 1.0)
        throw std::invalid_argument("risk level must lie in [0, 1)");
    if (scenarios.scenarios.rows() < 1)
        throw std::invalid_argument("at least one scenario is required");
    if (scenarios.scenarios.cols() != n)
        throw std::invalid_argument("scenario dimension does not match the bus count");
    if (p_max_injection.size() != n || p_max_withdrawal.size() != n)
        throw std::invalid_argument("cap vectors must have one entry per bus");
    if ((p_max_injection.array() < 0.0).any() || (p_max_withdrawal.array() < 0.0).any())
        throw std::invalid_argument("capacity parameters must be nonnegative");
    dso_cost.validate(n);
    for (const auto& bid : bids) bid.validate(n);
}

StochasticProgram assemble_stochastic(const StochasticAuctionInstance& instance) {
    instance.validate();
    const int n = instance.sensitivity.buses();
    const int m = instance.sensitivity.rows();
    const int s_count = static_cast<int>(instance.scenarios.scenarios.rows());
    const int k_count = static_cast<int>(instance.bids.size());
    const double tail_weight =
        1.0 / ((1.0 - instance.delta) * static_cast<double>(s_count));
    const double inv_s = 1.0 / static_cast<double>(s_count);

    StochasticProgram sp;
    sp.bus_count = n;
    sp.dera_count = k_count;
    sp.scenario_count = s_count;
    sp.row_count = m;
    ConvexProgram& prog = sp.program;

    std::vector<int> cinj_block(static_cast<size_t>(k_count)), cwdr_block(static_cast<size_t>(k_count));
    for (int k = 0; k < k_count; ++k) {
        const int dim = static_cast<int>(instance.bids[static_cast<size_t>(k)].active_buses.size());
        cinj_block[static_cast<size_t>(k)] = prog.add_block("Cinj/" + std::to_string(k), dim);
        cwdr_block[static_cast<size_t>(k)] = prog.add_block("Cwdr/" + std::to_string(k), dim);
    }
    std::vector<int> pinj(static_cast<size_t>(s_count)), pwdr(static_cast<size_t>(s_count));
    std::vector<int> ginj(static_cast<size_t>(s_count)), gwdr(static_cast<size_t>(s_count));
    for (int s = 0; s < s_count; ++s) {
        pinj[static_cast<size_t>(s)] = prog.add_block(lbl("Pinj", s), n);
        pwdr[static_cast<size_t>(s)] = prog.add_block(lbl("Pwdr", s), n);
        ginj[static_cast<size_t>(s)] = prog.add_block(lbl("Ginj", s), m);
        gwdr[static_cast<size_t>(s)] = prog.add_block(lbl("Gwdr", s), m);
    }
    const int tinj = prog.add_block("Tinj", m);
    const int twdr = prog.add_block("Twdr", m);

    // Objective: bids at full weight, DSO cost averaged over scenarios.
    for (int k = 0; k < k_count; ++k) {
        const auto& bid = instance.bids[static_cast<size_t>(k)];
        for (size_t a = 0; a < bid.active_buses.size(); ++a) {
            add_bid_objective(prog, cinj_block[static_cast<size_t>(k)], static_cast<int>(a),
                              bid.injection_curves[a]);
            add_bid_objective(prog, cwdr_block[static_cast<size_t>(k)], static_cast<int>(a),
                              bid.withdrawal_curves[a]);
        }
    }
    for (int s = 0; s < s_count; ++s) {
        for (int i = 0; i < n; ++i) {
            const auto& ci = instance.dso_cost.injection[static_cast<size_t>(i)];
            const auto& cw = instance.dso_cost.withdrawal[static_cast<size_t>(i)];
            prog.add_objective_term(pinj[static_cast<size_t>(s)], i, -inv_s * ci.quad_coeff,
                                    -inv_s * ci.lin_coeff);
            prog.add_objective_term(pwdr[static_cast<size_t>(s)], i, -inv_s * cw.quad_coeff,
                                    -inv_s * cw.lin_coeff);
            prog.add_constant_term(-inv_s * (ci.const_coeff + cw.const_coeff));
        }
    }

    // Floors (eta >= 0): -C <= -Cmin, shared across scenarios.
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

    const auto& sm = instance.sensitivity;
    for (int s = 0; s < s_count; ++s) {
        const Vec p0 = instance.scenarios.scenarios.row(s).transpose();
        const int pb = pinj[static_cast<size_t>(s)];
        const int wb = pwdr[static_cast<size_t>(s)];
        const int gb = ginj[static_cast<size_t>(s)];
        const int hb = gwdr[static_cast<size_t>(s)];

        // Per-scenario caps (omega[s] >= 0).
        for (int i = 0; i < n; ++i) {
            prog.add_constraint(lbl("cap_inj", s, i), {{pb, i, 1.0}}, Relation::LessEqual,
                                instance.p_max_injection(i));
            prog.add_constraint(lbl("cap_wdr", s, i), {{wb, i, 1.0}}, Relation::LessEqual,
                                instance.p_max_withdrawal(i));
        }
        // Couplings (lambda[s]):  sum_k C - P[s] = -p0[s]  (injection side)
        // and  sum_k C - P[s] = +p0[s]  (withdrawal side).
        for (int i = 0; i < n; ++i) {
            std::vector<LinearTerm> inj_terms, wdr_terms;
            for (int k = 0; k < k_count; ++k) {
                const auto& bid = instance.bids[static_cast<size_t>(k)];
                for (size_t a = 0; a < bid.active_buses.size(); ++a)
                    if (bid.active_buses[a] == i) {
                        inj_terms.push_back(
                            {cinj_block[static_cast<size_t>(k)], static_cast<int>(a), 1.0});
                        wdr_terms.push_back(
                            {cwdr_block[static_cast<size_t>(k)], static_cast<int>(a), 1.0});
                    }
            }
            inj_terms.push_back({pb, i, -1.0});
            wdr_terms.push_back({wb, i, -1.0});
            prog.add_constraint(lbl("couple_inj", s, i), std::move(inj_terms), Relation::Equal,
                                -p0(i));
            prog.add_constraint(lbl("couple_wdr", s, i), std::move(wdr_terms), Relation::Equal,
                                p0(i));
        }
        // Tail epigraph rows (beta[s] >= 0) and gamma nonnegativity.
        for (int r = 0; r < m; ++r) {
            std::vector<LinearTerm> up{{tinj, r, -1.0}, {gb, r, -1.0}};
            std::vector<LinearTerm> lo{{twdr, r, -1.0}, {hb, r, -1.0}};
            for (int i = 0; i < n; ++i) {
                if (sm.a_plus(r, i) != 0.0) {
                    up.push_back({pb, i, sm.a_plus(r, i)});
                    lo.push_back({wb, i, sm.a_plus(r, i)});
                }
                if (sm.a_minus(r, i) != 0.0) {
                    up.push_back({wb, i, sm.a_minus(r, i)});
                    lo.push_back({pb, i, sm.a_minus(r, i)});
                }
            }
            prog.add_constraint(lbl("epi_up", s, r), std::move(up), Relation::LessEqual,
                                sm.upper_bound(r));
            prog.add_constraint(lbl("epi_lo", s, r), std::move(lo), Relation::LessEqual,
                                -sm.lower_bound(r));
            prog.add_constraint(lbl("gpos_up", s, r), {{gb, r, -1.0}}, Relation::LessEqual, 0.0);
            prog.add_constraint(lbl("gpos_lo", s, r), {{hb, r, -1.0}}, Relation::LessEqual, 0.0);
        }
    }
    // Averaged tail rows (mu >= 0):  t + tail_weight * sum_s gamma[s] <= 0.
    for (int r = 0; r < m; ++r) {
        std::vector<LinearTerm> up{{tinj, r, 1.0}}, lo{{twdr, r, 1.0}};
        for (int s = 0; s < s_count; ++s) {
            up.push_back({ginj[static_cast<size_t>(s)], r, tail_weight});
            lo.push_back({gwdr[static_cast<size_t>(s)], r, tail_weight});
        }
        prog.add_constraint(lbl("avg_up", r), std::move(up), Relation::LessEqual, 0.0);
        prog.add_constraint(lbl("avg_lo", r), std::move(lo), Relation::LessEqual, 0.0);
    }
    return sp;
}

StochasticClearing clear_stochastic(const StochasticAuctionInstance& instance,
                                    const SolverOptions& options) {
    StochasticProgram sp = assemble_stochastic(instance);
    const int n = sp.bus_count;
    const int m = sp.row_count;
    const int s_count = sp.scenario_count;
    const int k_count = sp.dera_count;

    StochasticClearing clr;
    clr.outcome = solve(sp.program, options);
    if (clr.outcome.status != SolveStatus::Optimal) return clr;
    const auto& prog = sp.program;
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

    clr.total_injection.resize(static_cast<size_t>(s_count));
    clr.total_withdrawal.resize(static_cast<size_t>(s_count));
    clr.gamma_upper.resize(static_cast<size_t>(s_count));
    clr.gamma_lower.resize(static_cast<size_t>(s_count));
    clr.lambda_injection.assign(static_cast<size_t>(s_count), Vec(n));
    clr.lambda_withdrawal.assign(static_cast<size_t>(s_count), Vec(n));
    clr.omega_injection.assign(static_cast<size_t>(s_count), Vec(n));
    clr.omega_withdrawal.assign(static_cast<size_t>(s_count), Vec(n));
    clr.beta_upper.assign(static_cast<size_t>(s_count), Vec(m));
    clr.beta_lower.assign(static_cast<size_t>(s_count), Vec(m));
    clr.price_injection = Vec::Zero(n);
    clr.price_withdrawal = Vec::Zero(n);
    for (int s = 0; s < s_count; ++s) {
        const auto su = static_cast<size_t>(s);
        clr.total_injection[su] = out.primal[static_cast<size_t>(prog.block_id(lbl("Pinj", s)))];
        clr.total_withdrawal[su] = out.primal[static_cast<size_t>(prog.block_id(lbl("Pwdr", s)))];
        clr.gamma_upper[su] = out.primal[static_cast<size_t>(prog.block_id(lbl("Ginj", s)))];
        clr.gamma_lower[su] = out.primal[static_cast<size_t>(prog.block_id(lbl("Gwdr", s)))];
        for (int i = 0; i < n; ++i) {
            clr.lambda_injection[su](i) = out.dual(prog, lbl("couple_inj", s, i));
            clr.lambda_withdrawal[su](i) = out.dual(prog, lbl("couple_wdr", s, i));
            clr.omega_injection[su](i) = out.dual(prog, lbl("cap_inj", s, i));
            clr.omega_withdrawal[su](i) = out.dual(prog, lbl("cap_wdr", s, i));
        }
        for (int r = 0; r < m; ++r) {
            clr.beta_upper[su](r) = out.dual(prog, lbl("epi_up", s, r));
            clr.beta_lower[su](r) = out.dual(prog, lbl("epi_lo", s, r));
        }
        clr.price_injection += clr.lambda_injection[su];
        clr.price_withdrawal += clr.lambda_withdrawal[su];
    }
    clr.t_upper = out.primal[static_cast<size_t>(prog.block_id("Tinj"))];
    clr.t_lower = out.primal[static_cast<size_t>(prog.block_id("Twdr"))];
    clr.mu_upper = Vec(m);
    clr.mu_lower = Vec(m);
    for (int r = 0; r < m; ++r) {
        clr.mu_upper(r) = out.dual(prog, lbl("avg_up", r));
        clr.mu_lower(r) = out.dual(prog, lbl("avg_lo", r));
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
    // Baseline accesses for the cost delta split each scenario into its
    // positive (injection) and negative (withdrawal) parts.
    double cost_delta = 0.0;
    for (int s = 0; s < s_count; ++s) {
        const Vec p0 = instance.scenarios.scenarios.row(s).transpose();
        const Vec pos = p0.cwiseMax(0.0);
        const Vec neg = (-p0).cwiseMax(0.0);
        cost_delta += instance.dso_cost.value(clr.total_injection[static_cast<size_t>(s)],
                                              clr.total_withdrawal[static_cast<size_t>(s)]) -
                      instance.dso_cost.value(pos, neg);
    }
    cost_delta /= static_cast<double>(s_count);
    clr.dso_surplus = clr.payments.sum() - cost_delta;
    clr.social_surplus = clr.dso_surplus + clr.dera_surplus.sum();
    clr.objective = out.objective_value;
    return clr;
}

PriceIdentityResiduals lmap_s_identity_check(const StochasticClearing& clearing,
                                             const StochasticAuctionInstance& instance) {
    const auto& sm = instance.sensitivity;
    const int s_count = static_cast<int>(clearing.total_injection.size());
    const double inv_s = 1.0 / static_cast<double>(s_count);
    Vec rhs_inj = Vec::Zero(sm.buses());
    Vec rhs_wdr = Vec::Zero(sm.buses());
    for (int s = 0; s < s_count; ++s) {
        const auto su = static_cast<size_t>(s);
        rhs_inj += inv_s * instance.dso_cost.grad_injection(clearing.total_injection[su]) +
                   sm.a_plus.transpose() * clearing.beta_upper[su] +
                   sm.a_minus.transpose() * clearing.beta_lower[su] + clearing.omega_injection[su];
        rhs_wdr += inv_s * instance.dso_cost.grad_withdrawal(clearing.total_withdrawal[su]) +
                   sm.a_plus.transpose() * clearing.beta_lower[su] +
                   sm.a_minus.transpose() * clearing.beta_upper[su] + clearing.omega_withdrawal[su];
    }
    PriceIdentityResiduals res;
    res.injection = clearing.price_injection - rhs_inj;
    res.withdrawal = clearing.price_withdrawal - rhs_wdr;
    return res;
}

std::vector<AncestorPairCheck> stochastic_monotonicity_check(const StochasticClearing& clearing,
                                                             const GraphMatrices& graph,
                                                             double tol) {
    return monotonicity_check(clearing.price_injection, clearing.price_withdrawal, graph, tol);
}

}  // namespace netaccess
