#ifndef NETACCESS_SOLVER_HPP
#define NETACCESS_SOLVER_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace netaccess {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };
enum class Relation { LessEqual, Equal };

/// Coefficient on one entry of a variable block.
struct LinearTerm {
    int block;
    int index;
    double coeff;
};

struct KktResiduals;
struct SolveOutcome;
struct SolverOptions;
class ConvexProgram;
SolveOutcome solve(const ConvexProgram& program, const SolverOptions& options);
KktResiduals verify_kkt(const ConvexProgram& program, const SolveOutcome& outcome);

/// Maximize a concave separable objective over named variable blocks subject
/// to linear equality and <= constraints. Piecewise-linear objective terms
/// are lowered to hypograph form internally; the dual bookkeeping of
/// user-declared constraints is unaffected.
class ConvexProgram {
public:
    int add_block(const std::string& name, int dim);
    int block_id(const std::string& name) const;
    int block_dim(int block) const { return block_dims_[static_cast<size_t>(block)]; }

    // Adds quad * x^2 + lin * x (quad <= 0) on one variable.
    void add_objective_term(int block, int index, double quad, double lin);
    // Adds min_j (slope_j x + intercept_j) on one variable; segments must be
    // ordered with non-increasing slopes (concave envelope).
    void add_pwl_objective(int block, int index,
                           const std::vector<std::pair<double, double>>& segments);
    void add_constant_term(double c) { constant_ += c; }

    // Returns the constraint id; labels must be unique.
    int add_constraint(const std::string& label, std::vector<LinearTerm> terms, Relation rel,
                       double rhs);

    int constraint_id(const std::string& label) const;
    int num_constraints() const { return static_cast<int>(relations_.size()); }
    int num_variables() const { return total_dim_; }
    double constant_term() const { return constant_; }

    /// Plain-text dump of blocks, objective, and constraint triplets.
    std::string dump() const;

private:
    friend struct SolverWorkspace;
    friend SolveOutcome solve(const ConvexProgram&, const SolverOptions&);
    friend KktResiduals verify_kkt(const ConvexProgram&, const SolveOutcome&);
    std::vector<std::string> block_names_;
    std::vector<int> block_dims_;
    std::vector<int> block_offsets_;
    std::unordered_map<std::string, int> block_lookup_;
    int total_dim_ = 0;

    // Objective in maximize form on user variables.
    std::vector<double> quad_;  // per flat variable, coefficient of x^2
    std::vector<double> lin_;
    struct PwlTerm {
        int flat_index;
        std::vector<std::pair<double, double>> segments;
    };
    std::vector<PwlTerm> pwl_terms_;
    double constant_ = 0.0;

    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> label_lookup_;
    std::vector<Relation> relations_;
    std::vector<double> rhs_;
    std::vector<std::vector<LinearTerm>> rows_;

    int flat(int block, int index) const;
};

struct KktResiduals {
    double stationarity = 0.0;
    double feasibility = 0.0;       // equality + inequality violation
    double complementarity = 0.0;
    double dual_feasibility = 0.0;  // most negative inequality multiplier, clipped to >= 0
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalFailure;
    std::vector<Eigen::VectorXd> primal;  // per block
    Eigen::VectorXd duals;                // per constraint id, sign per cost-form Lagrangian
    double objective_value = 0.0;         // maximize sense, constant included
    KktResiduals kkt_residuals;
    int iterations = 0;
    std::string message;

    double dual(const ConvexProgram& p, const std::string& label) const {
        return duals(p.constraint_id(label));
    }
};

struct SolverOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
    bool verbose = false;
};

SolveOutcome solve(const ConvexProgram& program, const SolverOptions& options = {});

/// Recomputes all KKT residuals from the program data and a candidate
/// outcome, independently of the solve path.
KktResiduals verify_kkt(const ConvexProgram& program, const SolveOutcome& outcome);

}  // namespace netaccess

#endif
