#include <doctest.h>

#include <netaccess/network.hpp>

#include <random>

using namespace netaccess;

namespace {

RadialNetwork make_net(int buses, std::vector<std::pair<int, int>> edges) {
    RadialNetwork net;
    net.bus_count = buses;
    net.edges = std::move(edges);
    const auto e = static_cast<Eigen::Index>(net.edges.size());
    net.resistance = Vec::Constant(e, 0.01);
    net.reactance = Vec::Constant(e, 0.02);
    net.flow_limit = Vec::Constant(e, 1.0);
    return net;
}

// The published 5-bus feeder: edges 2-1, 5-2, 3-5, 4-5 (1-based).
RadialNetwork five_bus() {
    return make_net(5, {{1, 0}, {4, 1}, {2, 4}, {3, 4}});
}

// Random tree on n buses: parent of bus i drawn uniformly from 0..i-1, with
// scrambled edge orientation to exercise canonicalization.
RadialNetwork random_tree(int n, std::mt19937& rng) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < n; ++i) {
        int parent = std::uniform_int_distribution<int>(0, i - 1)(rng);
        if (rng() & 1)
            edges.emplace_back(i, parent);
        else
            edges.emplace_back(parent, i);
    }
    std::shuffle(edges.begin(), edges.end(), rng);
    return make_net(n, std::move(edges));
}

}  // namespace

TEST_CASE("five-bus incidence and path matrices match the published fixture") {
    GraphMatrices gm = build_graph_matrices(five_bus());

    IntMat expected_l(4, 5);
    expected_l << -1, 1, 0, 0, 0,
                   0, -1, 0, 0, 1,
                   0, 0, 1, 0, -1,
                   0, 0, 0, 1, -1;
    IntMat expected_s(4, 5);
    expected_s << 0, 1, 1, 1, 1,
                  0, 0, 1, 1, 1,
                  0, 0, 1, 0, 0,
                  0, 0, 0, 1, 0;
    CHECK(gm.incidence == expected_l);
    CHECK(gm.path == expected_s);
    CHECK(gm.reduced_incidence == expected_l.rightCols(4));
    CHECK(gm.reduced_path == expected_s.rightCols(4));
}

TEST_CASE("two-bus network gives the smallest tree matrices") {
    GraphMatrices gm = build_graph_matrices(make_net(2, {{1, 0}}));
    IntMat l(1, 2), s(1, 2);
    l << -1, 1;
    s << 0, 1;
    CHECK(gm.incidence == l);
    CHECK(gm.path == s);
}

TEST_CASE("reduced incidence inverse equals reduced path transpose") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 8;
        GraphMatrices gm = build_graph_matrices(random_tree(n, rng));
        IntMat prod = gm.reduced_incidence * gm.reduced_path.transpose();
        CHECK(prod == IntMat::Identity(n - 1, n - 1));
    }
}

TEST_CASE("ancestor columns of the path matrix dominate descendant columns") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        GraphMatrices gm = build_graph_matrices(random_tree(9, rng));
        for (int a = 0; a < 9; ++a)
            for (int b = 0; b < 9; ++b) {
                if (!gm.is_ancestor(a, b)) continue;
                // b's root path contains a's, so column b dominates column a.
                for (Eigen::Index r = 0; r < gm.path.rows(); ++r)
                    CHECK(gm.path(r, b) >= gm.path(r, a));
            }
    }
}

TEST_CASE("cyclic topology is rejected with the buses named") {
    RadialNetwork net = make_net(4, {{0, 1}, {1, 2}, {2, 1}});
    CHECK_THROWS_AS(build_graph_matrices(net), TopologyError);
}

TEST_CASE("disconnected topology is rejected") {
    RadialNetwork net = make_net(4, {{0, 1}, {2, 3}, {3, 2}});
    CHECK_THROWS_AS(build_graph_matrices(net), TopologyError);
}

TEST_CASE("line-flow block of the sensitivity model is the scaled path matrix") {
    RadialNetwork net = five_bus();
    net.power_factor_ratio = 0.0;
    SensitivityModel sm = build_sensitivity(net, false);
    GraphMatrices gm = build_graph_matrices(net);
    REQUIRE(sm.rows() == 4);
    CHECK(sm.a_matrix.isApprox(gm.path.cast<double>()));
    CHECK(sm.upper_bound.isApprox(net.flow_limit));
    CHECK(sm.lower_bound.isApprox(-net.flow_limit));
    CHECK(sm.a_minus.isZero(0.0));
}

TEST_CASE("power-factor ratio shrinks the real-power flow cap") {
    RadialNetwork net = five_bus();
    net.power_factor_ratio = 0.75;
    SensitivityModel sm = build_sensitivity(net, false);
    const double scale = 1.0 / std::sqrt(1.0 + 0.75 * 0.75);
    CHECK(sm.upper_bound(0) == doctest::Approx(net.flow_limit(0) * scale).epsilon(1e-12));
}

TEST_CASE("voltage block equals 2 S~^T D S~ with unit resistances") {
    RadialNetwork net = five_bus();
    net.resistance = Vec::Constant(4, 1.0);
    net.reactance = Vec::Constant(4, 0.5);
    net.power_factor_ratio = 0.0;  // D = diag(r) = I
    SensitivityModel sm = build_sensitivity(net, true);
    GraphMatrices gm = build_graph_matrices(net);
    Mat s_tilde = gm.reduced_path.cast<double>();
    Mat expected = 2.0 * s_tilde.transpose() * s_tilde;
    REQUIRE(sm.rows() == 4 + 4);
    CHECK(sm.a_matrix.block(4, 1, 4, 4).isApprox(expected, 1e-12));
    // Voltage rows have zero coefficient on the reference bus.
    CHECK(sm.a_matrix.block(4, 0, 4, 1).isZero(0.0));
    // Bounds offset by the reference voltage through the root-incident edge.
    for (int i = 0; i < 4; ++i) {
        CHECK(sm.upper_bound(4 + i) ==
              doctest::Approx(net.voltage_upper_sq - net.reference_voltage_sq).epsilon(1e-12));
        CHECK(sm.lower_bound(4 + i) ==
              doctest::Approx(net.voltage_lower_sq - net.reference_voltage_sq).epsilon(1e-12));
    }
}

TEST_CASE("worst-case range on the worked two-variable example") {
    Vec a(2), lo(2), hi(2);
    a << 1.0, -1.0;
    lo << -1.0, -2.0;
    hi << 2.0, 1.0;
    auto [mn, mx] = worst_case_range(a, lo, hi);
    CHECK(mx == 4.0);
    CHECK(mn == -2.0);
}

TEST_CASE("worst-case range of the zero functional is (0, 0)") {
    Vec a = Vec::Zero(3);
    Vec lo = Vec::Constant(3, -5.0), hi = Vec::Constant(3, 7.0);
    auto [mn, mx] = worst_case_range(a, lo, hi);
    CHECK(mn == 0.0);
    CHECK(mx == 0.0);
}

TEST_CASE("worst-case range matches vertex enumeration on random boxes") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 4);
        Vec a(d), lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
            a(i) = unif(rng);
            const double u = unif(rng), v = unif(rng);
            lo(i) = std::min(u, v);
            hi(i) = std::max(u, v);
        }
        double best_max = -1e300, best_min = 1e300;
        for (int mask = 0; mask < (1 << d); ++mask) {
            double val = 0.0;
            for (int i = 0; i < d; ++i) val += a(i) * ((mask >> i) & 1 ? hi(i) : lo(i));
            best_max = std::max(best_max, val);
            best_min = std::min(best_min, val);
        }
        auto [mn, mx] = worst_case_range(a, lo, hi);
        CHECK(mx == doctest::Approx(best_max).epsilon(1e-12));
        CHECK(mn == doctest::Approx(best_min).epsilon(1e-12));
    }
}

TEST_CASE("validation rejects nonpositive line data") {
    RadialNetwork net = five_bus();
    net.resistance(2) = 0.0;
    CHECK_THROWS_AS(net.validate(), std::invalid_argument);
}
