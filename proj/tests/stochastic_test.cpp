#include <doctest.h>

#include <netaccess/risk.hpp>
#include <netaccess/scenarios.hpp>
#include <netaccess/stochastic.hpp>

#include <random>

using namespace netaccess;

namespace {

ConcaveCurve quad(double q, double l, double c = 0.0) {
    ConcaveCurve cv;
    cv.curve = QuadraticCurve{q, l, c};
    return cv;
}

SensitivityModel scalar_sensitivity(double bound) {
    SensitivityModel sm;
    sm.a_matrix = Mat::Ones(1, 1);
    sm.a_plus = Mat::Ones(1, 1);
    sm.a_minus = Mat::Zero(1, 1);
    sm.upper_bound = Vec::Constant(1, bound);
    sm.lower_bound = Vec::Constant(1, -bound);
    sm.row_labels = {RowLabel{RowKind::LineFlow, 0}};
    return sm;
}

RadialNetwork random_network(int n, std::mt19937& rng, double flow_cap) {
    RadialNetwork net;
    net.bus_count = n;
    for (int i = 1; i < n; ++i)
        net.edges.emplace_back(i, std::uniform_int_distribution<int>(0, i - 1)(rng));
    const auto e = static_cast<Eigen::Index>(net.edges.size());
    net.resistance = Vec::Constant(e, 0.01);
    net.reactance = Vec::Constant(e, 0.02);
    net.flow_limit = Vec::Constant(e, flow_cap);
    net.power_factor_ratio = 0.4;
    return net;
}

ScenarioSet gaussian_scenarios(int n, int count, double mean, double sigma, double box,
                               std::uint64_t seed) {
    ScenarioSpec spec;
    for (int i = 0; i < n; ++i) spec.buses.push_back({mean, sigma, mean - box, mean + box});
    return sample_truncated_normal(spec, count, seed);
}

StochasticAuctionInstance random_instance(int n, int scenarios, std::mt19937& rng,
                                          double flow_cap, bool linear_dso, double p_max,
                                          std::uint64_t seed) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    StochasticAuctionInstance inst;
    inst.sensitivity = build_sensitivity(random_network(n, rng, flow_cap), false);
    const int deras = 1 + static_cast<int>(rng() % 2);
    for (int k = 0; k < deras; ++k) {
        DeraBid bid;
        bid.dera_id = "k" + std::to_string(k);
        for (int i = 1; i < n; ++i)
            if (rng() & 1) bid.active_buses.push_back(i);
        if (bid.active_buses.empty()) bid.active_buses.push_back(1 + static_cast<int>(rng() % (n - 1)));
        const auto dim = static_cast<Eigen::Index>(bid.active_buses.size());
        for (Eigen::Index a = 0; a < dim; ++a) {
            bid.injection_curves.push_back(quad(-0.5 - unif(rng), 1.0 + 2.0 * unif(rng)));
            bid.withdrawal_curves.push_back(quad(-0.5 - unif(rng), 1.0 + 2.0 * unif(rng)));
        }
        bid.c_min_injection = Vec::Zero(dim);
        bid.c_min_withdrawal = Vec::Zero(dim);
        inst.bids.push_back(bid);
    }
    inst.dso_cost = linear_dso ? DsoCost::uniform(n, QuadraticCurve{0.0, 0.4, 0.0})
                               : DsoCost::uniform(n, QuadraticCurve{0.1, 0.4, 0.0});
    inst.scenarios = gaussian_scenarios(n, scenarios, 0.0, 0.04, 0.1, seed);
    inst.delta = 0.9;
    inst.p_max_injection = Vec::Constant(n, p_max);
    inst.p_max_withdrawal = Vec::Constant(n, p_max);
    return inst;
}

RobustAuctionInstance robust_counterpart(const StochasticAuctionInstance& st) {
    RobustAuctionInstance rb;
    rb.sensitivity = st.sensitivity;
    rb.bids = st.bids;
    rb.dso_cost = st.dso_cost;
    const int n = st.scenarios.buses();
    rb.p0_upper = Vec::Zero(n);
    rb.p0_lower = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
        rb.p0_upper(i) = std::max(st.scenarios.scenarios.col(i).maxCoeff(), 0.0);
        rb.p0_lower(i) = std::max(-st.scenarios.scenarios.col(i).minCoeff(), 0.0);
    }
    rb.p_max_injection = st.p_max_injection;
    rb.p_max_withdrawal = st.p_max_withdrawal;
    return rb;
}

}  // namespace

TEST_CASE("one scenario at zero risk reduces to the robust clearing of that point") {
    // A single nonnegative scenario makes the degenerate box [0, p0], whose
    // binding (upper) rows coincide with the hard scenario rows.  Withdrawal
    // bids are priced below the DSO marginal cost so the lower rows, where
    // the two formulations differ, stay slack on both sides.
    std::mt19937 rng(5);
    StochasticAuctionInstance st;
    st.sensitivity = build_sensitivity(random_network(4, rng, 1.0), false);
    DeraBid bid;
    bid.dera_id = "solo";
    bid.active_buses = {1, 3};
    bid.injection_curves = {quad(-0.8, 3.0), quad(-1.2, 2.5)};
    bid.withdrawal_curves = {quad(-1.0, 0.2), quad(-1.0, 0.15)};
    bid.c_min_injection = Vec::Zero(2);
    bid.c_min_withdrawal = Vec::Zero(2);
    st.bids = {bid};
    st.dso_cost = DsoCost::uniform(4, QuadraticCurve{0.1, 0.4, 0.0});
    st.scenarios = gaussian_scenarios(4, 1, 0.05, 0.02, 0.05, 77);
    st.delta = 0.0;
    st.p_max_injection = Vec::Constant(4, 1.0);
    st.p_max_withdrawal = Vec::Constant(4, 1.0);
    SolverOptions tight;
    tight.tolerance = 1e-11;
    StochasticClearing scl = clear_stochastic(st, tight);
    REQUIRE(scl.outcome.status == SolveStatus::Optimal);

    RobustAuctionInstance rb;
    rb.sensitivity = st.sensitivity;
    rb.bids = st.bids;
    rb.dso_cost = st.dso_cost;
    Vec p0 = st.scenarios.scenarios.row(0).transpose();
    REQUIRE(p0.minCoeff() >= 0.0);
    rb.p0_upper = p0;
    rb.p0_lower = Vec::Zero(4);
    rb.p_max_injection = st.p_max_injection;
    rb.p_max_withdrawal = st.p_max_withdrawal;
    RobustClearing rcl = clear_robust(rb, tight);
    REQUIRE(rcl.outcome.status == SolveStatus::Optimal);

    for (size_t k = 0; k < st.bids.size(); ++k) {
        CHECK((scl.c_injection[k] - rcl.c_injection[k]).cwiseAbs().maxCoeff() < 1e-4);
        CHECK((scl.c_withdrawal[k] - rcl.c_withdrawal[k]).cwiseAbs().maxCoeff() < 1e-4);
    }
}

TEST_CASE("variable count follows the block structure") {
    std::mt19937 rng(9);
    const int n = 4, s = 6;
    StochasticAuctionInstance st = random_instance(n, s, rng, 1.5, true, 1.0, 5);
    StochasticProgram sp = assemble_stochastic(st);
    int bid_buses = 0;
    for (const auto& b : st.bids) bid_buses += static_cast<int>(b.active_buses.size());
    const int m = static_cast<int>(st.sensitivity.rows());
    CHECK(sp.program.num_variables() == 2 * bid_buses + 2 * s * n + 2 * m + 2 * s * m);
}

TEST_CASE("per-scenario couplings and tail rows hold at the optimum") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        StochasticAuctionInstance st = random_instance(4, 12, rng, 1.5, trial % 2 == 0, 1.0,
                                                       100 + static_cast<std::uint64_t>(trial));
        StochasticClearing cl = clear_stochastic(st);
        REQUIRE(cl.outcome.status == SolveStatus::Optimal);
        const int n = 4;
        Vec sum_inj = Vec::Zero(n), sum_wdr = Vec::Zero(n);
        for (size_t k = 0; k < st.bids.size(); ++k) {
            sum_inj += cl.c_injection[k];
            sum_wdr += cl.c_withdrawal[k];
        }
        const int s_count = st.scenarios.count();
        const auto m = st.sensitivity.rows();
        Vec tail_up = Vec::Zero(m), tail_lo = Vec::Zero(m);
        for (int s = 0; s < s_count; ++s) {
            Vec p0 = st.scenarios.scenarios.row(s).transpose();
            CHECK((cl.total_injection[static_cast<size_t>(s)] - sum_inj - p0).cwiseAbs().maxCoeff() <
                  1e-6);
            CHECK((cl.total_withdrawal[static_cast<size_t>(s)] - sum_wdr + p0).cwiseAbs().maxCoeff() <
                  1e-6);
            CHECK(cl.gamma_upper[static_cast<size_t>(s)].minCoeff() > -1e-8);
            CHECK(cl.gamma_lower[static_cast<size_t>(s)].minCoeff() > -1e-8);
            tail_up += cl.gamma_upper[static_cast<size_t>(s)];
            tail_lo += cl.gamma_lower[static_cast<size_t>(s)];
        }
        const double w = 1.0 / ((1.0 - st.delta) * s_count);
        CHECK((cl.t_upper + w * tail_up).maxCoeff() < 1e-6);
        CHECK((cl.t_lower + w * tail_lo).maxCoeff() < 1e-6);
    }
}

TEST_CASE("price identity from per-scenario duals holds on random instances") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        StochasticAuctionInstance st = random_instance(3 + static_cast<int>(rng() % 3), 10, rng,
                                                       1.0 + (trial % 3), trial % 2 == 0, 1.5,
                                                       300 + static_cast<std::uint64_t>(trial));
        StochasticClearing cl = clear_stochastic(st);
        REQUIRE(cl.outcome.status == SolveStatus::Optimal);
        PriceIdentityResiduals res = lmap_s_identity_check(cl, st);
        CHECK(res.max_residual() < 1e-6);
    }
}

TEST_CASE("tail constraint on one row agrees with a direct cvar evaluation") {
    // Single bus, single row: the cleared allocation must sit exactly on the
    // boundary cvar(total injection) = cap whenever the averaged tail row has
    // a positive dual.
    StochasticAuctionInstance st;
    st.sensitivity = scalar_sensitivity(1.0);
    DeraBid bid;
    bid.dera_id = "one";
    bid.active_buses = {0};
    bid.injection_curves = {quad(-1.0, 8.0)};  // wants far more than the cap
    bid.withdrawal_curves = {quad(0.0, 0.0)};
    bid.c_min_injection = Vec::Zero(1);
    bid.c_min_withdrawal = Vec::Zero(1);
    st.bids = {bid};
    st.dso_cost = DsoCost::uniform(1, QuadraticCurve{0.0, 0.1, 0.0});
    st.scenarios = gaussian_scenarios(1, 400, 0.0, 0.08, 0.3, 55);
    st.delta = 0.9;
    st.p_max_injection = Vec::Constant(1, 10.0);
    st.p_max_withdrawal = Vec::Constant(1, 10.0);

    StochasticClearing cl = clear_stochastic(st);
    REQUIRE(cl.outcome.status == SolveStatus::Optimal);
    EmpiricalDistribution dist;
    dist.samples = (st.scenarios.scenarios.col(0).array() + cl.c_injection[0](0)).matrix();
    const double tail = cvar(dist, st.delta);
    CHECK(tail <= 1.0 + 1e-6);
    REQUIRE(cl.mu_upper(0) > 1e-6);  // cap is economically binding
    CHECK(tail == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("risk-aware clearing dominates the robust clearing on shared support") {
    // Degenerate scenarios pinned to one point make the two baselines equal,
    // so the social-surplus comparison is exact.
    std::mt19937 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        StochasticAuctionInstance st = random_instance(4, 8, rng, 1.2, trial % 2 == 0, 1.0,
                                                       500 + static_cast<std::uint64_t>(trial));
        Vec point = st.scenarios.scenarios.row(0).transpose();
        for (int s = 0; s < st.scenarios.count(); ++s)
            st.scenarios.scenarios.row(s) = point.transpose();
        StochasticClearing scl = clear_stochastic(st);
        REQUIRE(scl.outcome.status == SolveStatus::Optimal);

        RobustAuctionInstance rb = robust_counterpart(st);
        RobustClearing rcl = clear_robust(rb);
        REQUIRE(rcl.outcome.status == SolveStatus::Optimal);
        CHECK(scl.social_surplus >= rcl.social_surplus - 1e-6);
    }
    // With non-degenerate support inside the box the cleared objective still
    // dominates: the robust allocation stays feasible for the scenario program.
    StochasticAuctionInstance st = random_instance(4, 40, rng, 1.2, true, 1.0, 600);
    StochasticClearing scl = clear_stochastic(st);
    RobustClearing rcl = clear_robust(robust_counterpart(st));
    REQUIRE(scl.outcome.status == SolveStatus::Optimal);
    REQUIRE(rcl.outcome.status == SolveStatus::Optimal);
    CHECK(scl.objective >= rcl.objective - 1e-6);
}

TEST_CASE("near-one risk level with box corners recovers the robust allocation") {
    // 3-bus chain, bid at the leaf, tight line caps; scenarios enumerate all
    // corners of the uncertainty box so CVaR at delta ~ 1 becomes the max.
    RadialNetwork net;
    net.bus_count = 3;
    net.edges = {{1, 0}, {2, 1}};
    net.resistance = Vec::Constant(2, 0.01);
    net.reactance = Vec::Constant(2, 0.02);
    net.flow_limit = Vec::Constant(2, 1.0);
    net.power_factor_ratio = 0.0;

    DeraBid bid;
    bid.dera_id = "leaf";
    bid.active_buses = {2};
    bid.injection_curves = {quad(-1.0, 6.0)};
    bid.withdrawal_curves = {quad(-1.0, 6.0)};
    bid.c_min_injection = Vec::Zero(1);
    bid.c_min_withdrawal = Vec::Zero(1);

    const double box = 0.2;
    RobustAuctionInstance rb;
    rb.sensitivity = build_sensitivity(net, false);
    rb.bids = {bid};
    rb.dso_cost = DsoCost::uniform(3, QuadraticCurve{0.0, 0.3, 0.0});
    rb.p0_upper = Vec::Constant(3, box);
    rb.p0_lower = Vec::Constant(3, box);
    rb.p_max_injection = Vec::Constant(3, 5.0);
    rb.p_max_withdrawal = Vec::Constant(3, 5.0);
    RobustClearing rcl = clear_robust(rb);
    REQUIRE(rcl.outcome.status == SolveStatus::Optimal);

    StochasticAuctionInstance st;
    st.sensitivity = rb.sensitivity;
    st.bids = rb.bids;
    st.dso_cost = rb.dso_cost;
    st.scenarios.scenarios.resize(8, 3);
    for (int mask = 0; mask < 8; ++mask)
        for (int i = 0; i < 3; ++i)
            st.scenarios.scenarios(mask, i) = (mask >> i) & 1 ? box : -box;
    st.delta = 0.999;
    st.p_max_injection = rb.p_max_injection;
    st.p_max_withdrawal = rb.p_max_withdrawal;
    StochasticClearing scl = clear_stochastic(st);
    REQUIRE(scl.outcome.status == SolveStatus::Optimal);

    const double c_rob = rcl.c_injection[0](2);
    const double c_sto = scl.c_injection[0](2);
    REQUIRE(c_rob > 0.1);  // the line cap actually binds
    CHECK(std::abs(c_sto - c_rob) <= 0.02 * c_rob);
    CHECK(std::abs(scl.c_withdrawal[0](2) - rcl.c_withdrawal[0](2)) <=
          0.02 * rcl.c_withdrawal[0](2));
}

TEST_CASE("held-out scenarios violate cleared rows within the statistical budget") {
    StochasticAuctionInstance st;
    st.sensitivity = scalar_sensitivity(0.5);
    DeraBid bid;
    bid.dera_id = "solo";
    bid.active_buses = {0};
    bid.injection_curves = {quad(-0.5, 5.0)};
    bid.withdrawal_curves = {quad(-0.5, 5.0)};
    bid.c_min_injection = Vec::Zero(1);
    bid.c_min_withdrawal = Vec::Zero(1);
    st.bids = {bid};
    st.dso_cost = DsoCost::uniform(1, QuadraticCurve{0.0, 0.2, 0.0});
    st.scenarios = gaussian_scenarios(1, 300, 0.0, 0.06, 0.25, 91);
    st.delta = 0.9;
    st.p_max_injection = Vec::Constant(1, 5.0);
    st.p_max_withdrawal = Vec::Constant(1, 5.0);
    StochasticClearing cl = clear_stochastic(st);
    REQUIRE(cl.outcome.status == SolveStatus::Optimal);

    ScenarioSet held_out = gaussian_scenarios(1, 5000, 0.0, 0.06, 0.25, 92);
    // Adversarial aggregator position: full allocated access in the row
    // direction (the sensitivity coefficients are nonnegative).
    Eigen::VectorXd up = (held_out.scenarios.col(0).array() + cl.c_injection[0](0) - 0.5).matrix();
    Eigen::VectorXd lo =
        (-held_out.scenarios.col(0).array() + cl.c_withdrawal[0](0) - 0.5).matrix();
    const double budget =
        (1.0 - st.delta) + 2.0 * std::sqrt(st.delta * (1.0 - st.delta) / 5000.0);
    CHECK(violation_probability(up, 0.0) <= budget);
    CHECK(violation_probability(lo, 0.0) <= budget);
}

TEST_CASE("DSO surplus is nonnegative; DERA surplus nonneg under the hypothesis") {
    std::mt19937 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        StochasticAuctionInstance st = random_instance(4, 15, rng, 1.5, trial % 2 == 0, 1.0,
                                                       700 + static_cast<std::uint64_t>(trial));
        StochasticClearing cl = clear_stochastic(st);
        REQUIRE(cl.outcome.status == SolveStatus::Optimal);
        CHECK(cl.dso_surplus >= -1e-8);
        for (size_t k = 0; k < st.bids.size(); ++k)
            if (st.bids[k].value_at_zero() >= 0.0 &&
                st.bids[k].c_min_injection.isZero(0.0) && st.bids[k].c_min_withdrawal.isZero(0.0))
                CHECK(cl.dera_surplus(static_cast<Eigen::Index>(k)) >= -1e-8);
    }
}

TEST_CASE("prices do not decrease away from the substation with linear homogeneous cost") {
    std::mt19937 rng(53);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 3);
        RadialNetwork net = random_network(n, rng, 0.6);
        StochasticAuctionInstance st = random_instance(n, 12, rng, 0.6, true, 100.0,
                                                       800 + static_cast<std::uint64_t>(trial));
        st.sensitivity = build_sensitivity(net, false);
        st.dso_cost = DsoCost::uniform(n, QuadraticCurve{0.0, 0.4, 0.0});
        StochasticClearing cl = clear_stochastic(st);
        REQUIRE(cl.outcome.status == SolveStatus::Optimal);
        GraphMatrices gm = build_graph_matrices(net);
        for (const auto& pair : stochastic_monotonicity_check(cl, gm)) {
            CHECK(pair.ok);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("identical scenarios clear the same as a single scenario") {
    std::mt19937 rng(59);
    StochasticAuctionInstance st = random_instance(4, 9, rng, 1.5, false, 1.0, 900);
    Vec point = st.scenarios.scenarios.row(0).transpose();
    for (int s = 0; s < st.scenarios.count(); ++s) st.scenarios.scenarios.row(s) = point.transpose();
    SolverOptions tight;
    tight.tolerance = 1e-11;
    StochasticClearing many = clear_stochastic(st, tight);
    REQUIRE(many.outcome.status == SolveStatus::Optimal);

    StochasticAuctionInstance one = st;
    one.scenarios.scenarios = point.transpose();
    StochasticClearing single = clear_stochastic(one, tight);
    REQUIRE(single.outcome.status == SolveStatus::Optimal);
    for (size_t k = 0; k < st.bids.size(); ++k) {
        CHECK((many.c_injection[k] - single.c_injection[k]).cwiseAbs().maxCoeff() < 1e-5);
        CHECK((many.c_withdrawal[k] - single.c_withdrawal[k]).cwiseAbs().maxCoeff() < 1e-5);
    }
}
