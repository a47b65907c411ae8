#ifndef NETACCESS_NETWORK_HPP
#define NETACCESS_NETWORK_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netaccess {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntMat = Eigen::MatrixXi;

struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Radial distribution feeder. Bus 0 is the reference (substation) bus.
/// Edge attributes (r, x, flow limit) are per unit.
struct RadialNetwork {
    int bus_count = 0;
    // Edges as given; direction is arbitrary and re-oriented internally.
    std::vector<std::pair<int, int>> edges;
    Vec resistance;      // per edge, p.u.
    Vec reactance;       // per edge, p.u.
    Vec flow_limit;      // apparent-flow cap per edge, p.u.
    double power_factor_ratio = 0.0;           // reactive = alpha * real
    double voltage_lower_sq = 0.95 * 0.95;     // squared-voltage band
    double voltage_upper_sq = 1.05 * 1.05;
    double reference_voltage_sq = 1.0;

    // Throws TopologyError / std::invalid_argument on a malformed network.
    void validate() const;
};

/// Incidence and path matrices of the feeder, in canonical form: every edge
/// is stored child -> parent (toward the substation) and rows follow the
/// breadth-first discovery order from the reference bus with children
/// visited in increasing bus index. Matrices are integer-exact.
struct GraphMatrices {
    IntMat incidence;          // (N-1) x N, one +1 (child) and one -1 (parent) per row
    IntMat path;               // (N-1) x N, path(e,j)=1 iff edge e on path root->bus j
    IntMat reduced_incidence;  // reference-bus column dropped
    IntMat reduced_path;
    // canonical_edges[e] = (child, parent); input_edge_of[e] maps a canonical
    // row back to the position of that edge in RadialNetwork::edges.
    std::vector<std::pair<int, int>> canonical_edges;
    std::vector<int> input_edge_of;
    // parent[i] for i != 0; depth from root.
    std::vector<int> parent;
    std::vector<int> depth;

    bool is_ancestor(int bus_a, int bus_b) const;  // a on path root->b, a != b
};

enum class RowKind { LineFlow, Voltage };

struct RowLabel {
    RowKind kind;
    int index;  // canonical edge index for flows, bus index for voltage rows
};

/// Constraint system  b_lo <= A p <= b_hi  for full injection vectors p in R^N.
struct SensitivityModel {
    Mat a_matrix;   // M x N
    Mat a_plus;     // element-wise positive part
    Mat a_minus;    // a_plus - a_matrix
    Vec upper_bound;
    Vec lower_bound;
    std::vector<RowLabel> row_labels;

    int rows() const { return static_cast<int>(a_matrix.rows()); }
    int buses() const { return static_cast<int>(a_matrix.cols()); }
};

GraphMatrices build_graph_matrices(const RadialNetwork& net);

SensitivityModel build_sensitivity(const RadialNetwork& net, bool include_voltage);

/// Exact extremes of a.dot(p) over the box [p_lower, p_upper].
std::pair<double, double> worst_case_range(const Vec& a_row, const Vec& p_lower,
                                           const Vec& p_upper);

}  // namespace netaccess

#endif
