#include "netaccess/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace netaccess {

void RadialNetwork::validate() const {
    if (bus_count < 2) throw std::invalid_argument("network needs at least 2 buses");
    if (static_cast<int>(edges.size()) != bus_count - 1)
        throw TopologyError("expected " + std::to_string(bus_count - 1) + " edges, got " +
                            std::to_string(edges.size()));
    auto check_vec = [&](const Vec& v, const char* name) {
        if (v.size() != static_cast<Eigen::Index>(edges.size()))
            throw std::invalid_argument(std::string(name) + " length must match edge count");
        if ((v.array() <= 0.0).any())
            throw std::invalid_argument(std::string(name) + " must be strictly positive");
    };
    check_vec(resistance, "resistance");
    check_vec(reactance, "reactance");
    check_vec(flow_limit, "flow_limit");
    if (!(voltage_lower_sq < voltage_upper_sq))
        throw std::invalid_argument("voltage band lower must be below upper");
    for (auto [a, b] : edges) {
        if (a < 0 || a >= bus_count || b < 0 || b >= bus_count || a == b)
            throw TopologyError("edge (" + std::to_string(a + 1) + "," + std::to_string(b + 1) +
                                ") references an invalid bus");
    }
    // Connectivity/acyclicity is established in build_graph_matrices.
}

GraphMatrices build_graph_matrices(const RadialNetwork& net) {
    net.validate();
    const int n = net.bus_count;

    // Undirected adjacency with the input edge index on each arc.
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    for (int e = 0; e < n - 1; ++e) {
        auto [a, b] = net.edges[e];
        adj[a].push_back({b, e});
        adj[b].push_back({a, e});
    }
    for (auto& nbrs : adj)
        std::sort(nbrs.begin(), nbrs.end());

    GraphMatrices g;
    g.parent.assign(n, -1);
    g.depth.assign(n, 0);
    std::vector<int> visited(n, 0);
    std::queue<int> frontier;
    visited[0] = 1;
    frontier.push(0);
    while (!frontier.empty()) {
        int u = frontier.front();
        frontier.pop();
        for (auto [v, e] : adj[u]) {
            if (visited[v]) {
                if (v != g.parent[u])
                    throw TopologyError("cycle through buses " + std::to_string(u + 1) + " and " +
                                        std::to_string(v + 1));
                continue;
            }
            visited[v] = 1;
            g.parent[v] = u;
            g.depth[v] = g.depth[u] + 1;
            g.canonical_edges.push_back({v, u});  // child -> parent
            g.input_edge_of.push_back(e);
            frontier.push(v);
        }
    }
    if (static_cast<int>(g.canonical_edges.size()) != n - 1) {
        std::ostringstream msg;
        msg << "disconnected topology; unreachable buses:";
        for (int i = 0; i < n; ++i)
            if (!visited[i]) msg << ' ' << (i + 1);
        throw TopologyError(msg.str());
    }

    const int m = n - 1;
    g.incidence = IntMat::Zero(m, n);
    g.path = IntMat::Zero(m, n);
    std::vector<int> edge_of_child(n, -1);
    for (int e = 0; e < m; ++e) {
        auto [child, par] = g.canonical_edges[e];
        g.incidence(e, child) = 1;
        g.incidence(e, par) = -1;
        edge_of_child[child] = e;
    }
    // path(e, j) = 1 iff edge e lies on the unique path root -> bus j.
    for (int j = 1; j < n; ++j)
        for (int b = j; b != 0; b = g.parent[b])
            g.path(edge_of_child[b], j) = 1;

    g.reduced_incidence = g.incidence.rightCols(n - 1);
    g.reduced_path = g.path.rightCols(n - 1);
    return g;
}

bool GraphMatrices::is_ancestor(int bus_a, int bus_b) const {
    if (bus_a == bus_b) return false;
    int b = bus_b;
    while (b != 0) {
        b = parent[b];
        if (b == bus_a) return true;
    }
    return bus_a == 0 ? true : false;
}

SensitivityModel build_sensitivity(const RadialNetwork& net, bool include_voltage) {
    GraphMatrices g = build_graph_matrices(net);
    const int n = net.bus_count;
    const int m = n - 1;
    const double alpha = net.power_factor_ratio;

    Mat s_red = g.reduced_path.cast<double>();

    Vec r(m), x(m), f_cap(m);
    for (int e = 0; e < m; ++e) {
        int ie = g.input_edge_of[e];
        r(e) = net.resistance(ie);
        x(e) = net.reactance(ie);
        f_cap(e) = net.flow_limit(ie);
    }

    const int rows = include_voltage ? 2 * m : m;
    SensitivityModel model;
    model.a_matrix = Mat::Zero(rows, n);
    model.upper_bound = Vec::Zero(rows);
    model.lower_bound = Vec::Zero(rows);
    model.row_labels.reserve(rows);

    // Line-flow block: f = S~ p~ within +/- f_cap / sqrt(1 + alpha^2).
    const double scale = 1.0 / std::sqrt(1.0 + alpha * alpha);
    model.a_matrix.topRightCorner(m, n - 1) = s_red;
    model.upper_bound.head(m) = f_cap * scale;
    model.lower_bound.head(m) = -f_cap * scale;
    for (int e = 0; e < m; ++e)
        model.row_labels.push_back({RowKind::LineFlow, e});

    if (include_voltage) {
        Vec d = r + alpha * x;
        model.a_matrix.bottomRightCorner(m, n - 1) =
            2.0 * s_red.transpose() * d.asDiagonal() * s_red;
        // Reference-voltage offset: exactly one root-incident edge lies on the
        // path to every bus, so the offset is uniform u(1).
        Vec ref_offset = Vec::Zero(m);
        for (int e = 0; e < m; ++e)
            if (g.canonical_edges[e].second == 0)
                ref_offset += net.reference_voltage_sq * s_red.row(e).transpose();
        model.upper_bound.tail(m) = Vec::Constant(m, net.voltage_upper_sq) - ref_offset;
        model.lower_bound.tail(m) = Vec::Constant(m, net.voltage_lower_sq) - ref_offset;
        for (int j = 1; j < n; ++j)
            model.row_labels.push_back({RowKind::Voltage, j});
    }

    model.a_plus = model.a_matrix.cwiseMax(0.0);
    model.a_minus = model.a_plus - model.a_matrix;
    return model;
}

std::pair<double, double> worst_case_range(const Vec& a_row, const Vec& p_lower,
                                           const Vec& p_upper) {
    if (a_row.size() != p_lower.size() || a_row.size() != p_upper.size())
        throw std::invalid_argument("worst_case_range: dimension mismatch");
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index i = 0; i < a_row.size(); ++i) {
        const double a = a_row(i);
        if (a >= 0.0) {
            hi += a * p_upper(i);
            lo += a * p_lower(i);
        } else {
            hi += a * p_lower(i);
            lo += a * p_upper(i);
        }
    }
    return {lo, hi};
}

}  // namespace netaccess
