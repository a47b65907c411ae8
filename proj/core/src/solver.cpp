#include "netaccess/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <iostream>

namespace netaccess {

int ConvexProgram::add_block(const std::string& name, int dim) {
    if (dim <= 0) throw std::invalid_argument("block '" + name + "' must have positive dimension");
    if (block_lookup_.count(name)) throw std::invalid_argument("duplicate block '" + name + "'");
    const int id = static_cast<int>(block_names_.size());
    block_names_.push_back(name);
    block_dims_.push_back(dim);
    block_offsets_.push_back(total_dim_);
    block_lookup_[name] = id;
    total_dim_ += dim;
    quad_.resize(static_cast<size_t>(total_dim_), 0.0);
    lin_.resize(static_cast<size_t>(total_dim_), 0.0);
    return id;
}

int ConvexProgram::block_id(const std::string& name) const {
    auto it = block_lookup_.find(name);
    if (it == block_lookup_.end()) throw std::invalid_argument("unknown block '" + name + "'");
    return it->second;
}

int ConvexProgram::flat(int block, int index) const {
    if (block < 0 || block >= static_cast<int>(block_dims_.size()) || index < 0 ||
        index >= block_dims_[static_cast<size_t>(block)])
        throw std::out_of_range("variable reference out of range");
    return block_offsets_[static_cast<size_t>(block)] + index;
}

void ConvexProgram::add_objective_term(int block, int index, double quad, double lin) {
    if (quad > 0.0) throw std::invalid_argument("objective must be concave (quad <= 0)");
    const int f = flat(block, index);
    quad_[static_cast<size_t>(f)] += quad;
    lin_[static_cast<size_t>(f)] += lin;
}

void ConvexProgram::add_pwl_objective(int block, int index,
                                      const std::vector<std::pair<double, double>>& segments) {
    if (segments.empty()) throw std::invalid_argument("pwl objective needs segments");
    for (size_t j = 0; j + 1 < segments.size(); ++j)
        if (segments[j].first < segments[j + 1].first - 1e-12)
            throw std::invalid_argument("pwl objective segments must have non-increasing slopes");
    pwl_terms_.push_back({flat(block, index), segments});
}

int ConvexProgram::add_constraint(const std::string& label, std::vector<LinearTerm> terms,
                                  Relation rel, double rhs) {
    if (label_lookup_.count(label)) throw std::invalid_argument("duplicate constraint label '" + label + "'");
    for (const auto& t : terms) (void)flat(t.block, t.index);  // bounds check
    const int id = static_cast<int>(labels_.size());
    labels_.push_back(label);
    label_lookup_[label] = id;
    relations_.push_back(rel);
    rhs_.push_back(rhs);
    rows_.push_back(std::move(terms));
    return id;
}

int ConvexProgram::constraint_id(const std::string& label) const {
    auto it = label_lookup_.find(label);
    if (it == label_lookup_.end()) throw std::invalid_argument("unknown constraint '" + label + "'");
    return it->second;
}

std::string ConvexProgram::dump() const {
    std::ostringstream out;
    out << "blocks:\n";
    for (size_t b = 0; b < block_names_.size(); ++b)
        out << "  " << block_names_[b] << " dim=" << block_dims_[b] << "\n";
    out << "objective (maximize):\n";
    for (int f = 0; f < total_dim_; ++f)
        if (quad_[static_cast<size_t>(f)] != 0.0 || lin_[static_cast<size_t>(f)] != 0.0)
            out << "  x" << f << ": " << quad_[static_cast<size_t>(f)] << " x^2 + "
                << lin_[static_cast<size_t>(f)] << " x\n";
    out << "constraints:\n";
    for (size_t r = 0; r < rows_.size(); ++r) {
        out << "  " << labels_[r] << ":";
        for (const auto& t : rows_[r])
            out << " (" << t.block << "," << t.index << "," << t.coeff << ")";
        out << (relations_[r] == Relation::Equal ? " == " : " <= ") << rhs_[r] << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Interior-point solve (Mehrotra predictor-corrector on the cost-form QP).
// ---------------------------------------------------------------------------

struct SolverWorkspace {
    using SpMat = Eigen::SparseMatrix<double>;
    using Triplet = Eigen::Triplet<double>;

    const ConvexProgram& p;
    int n = 0;   // user variables + pwl auxiliaries
    int me = 0;  // equalities
    int mi = 0;  // inequalities

    SpMat q_mat, eq_mat, ineq_mat;
    Eigen::VectorXd cost, eq_rhs, ineq_rhs;
    // constraint id -> (is_equality, row index in eq or ineq)
    std::vector<std::pair<bool, int>> row_of_constraint;

    explicit SolverWorkspace(const ConvexProgram& prog) : p(prog) { assemble(); }

    void assemble() {
        const int n_user = p.total_dim_;
        const int n_aux = static_cast<int>(p.pwl_terms_.size());
        n = n_user + n_aux;

        cost = Eigen::VectorXd::Zero(n);
        std::vector<Triplet> q_trip;
        for (int f = 0; f < n_user; ++f) {
            cost(f) = -p.lin_[static_cast<size_t>(f)];
            const double q = -2.0 * p.quad_[static_cast<size_t>(f)];
            if (q != 0.0) q_trip.push_back({f, f, q});
        }
        for (int a = 0; a < n_aux; ++a) cost(n_user + a) = -1.0;  // maximize the hypograph var

        std::vector<Triplet> e_trip, g_trip;
        std::vector<double> e_rhs, g_rhs;
        row_of_constraint.resize(p.rows_.size());
        for (size_t r = 0; r < p.rows_.size(); ++r) {
            const bool eq = p.relations_[r] == Relation::Equal;
            auto& trip = eq ? e_trip : g_trip;
            auto& rhs = eq ? e_rhs : g_rhs;
            const int row = static_cast<int>(rhs.size());
            for (const auto& t : p.rows_[r])
                trip.push_back({row, p.flat(t.block, t.index), t.coeff});
            rhs.push_back(p.rhs_[r]);
            row_of_constraint[r] = {eq, row};
        }
        // Hypograph rows: z - slope * x <= intercept.
        for (int a = 0; a < n_aux; ++a) {
            const auto& term = p.pwl_terms_[static_cast<size_t>(a)];
            for (const auto& [slope, intercept] : term.segments) {
                const int row = static_cast<int>(g_rhs.size());
                g_trip.push_back({row, n_user + a, 1.0});
                if (slope != 0.0) g_trip.push_back({row, term.flat_index, -slope});
                g_rhs.push_back(intercept);
            }
        }

        me = static_cast<int>(e_rhs.size());
        mi = static_cast<int>(g_rhs.size());
        q_mat.resize(n, n);
        q_mat.setFromTriplets(q_trip.begin(), q_trip.end());
        eq_mat.resize(me, n);
        eq_mat.setFromTriplets(e_trip.begin(), e_trip.end());
        ineq_mat.resize(mi, n);
        ineq_mat.setFromTriplets(g_trip.begin(), g_trip.end());
        eq_rhs = Eigen::Map<Eigen::VectorXd>(e_rhs.data(), me);
        ineq_rhs = Eigen::Map<Eigen::VectorXd>(g_rhs.data(), mi);
    }

    double objective_max_form(const Eigen::VectorXd& x) const {
        double v = p.constant_;
        for (int f = 0; f < p.total_dim_; ++f)
            v += (p.quad_[static_cast<size_t>(f)] * x(f) + p.lin_[static_cast<size_t>(f)]) * x(f);
        for (const auto& term : p.pwl_terms_) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [slope, intercept] : term.segments)
                best = std::min(best, slope * x(term.flat_index) + intercept);
            v += best;
        }
        return v;
    }
};

namespace {

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double step_to_boundary(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
    return alpha;
}

}  // namespace

SolveOutcome solve(const ConvexProgram& program, const SolverOptions& options) {
    using SpMat = Eigen::SparseMatrix<double>;
    SolverWorkspace w(program);
    const int n = w.n, me = w.me, mi = w.mi;
    const double tol = options.tolerance;

    SolveOutcome out;
    out.duals = Eigen::VectorXd::Zero(program.num_constraints());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(me);
    const double slack_init = 1.0 + inf_norm(w.ineq_rhs);
    Eigen::VectorXd s = Eigen::VectorXd::Constant(mi, slack_init);
    Eigen::VectorXd z = Eigen::VectorXd::Constant(mi, 1.0);

    const double scale_d = 1.0 + inf_norm(w.cost);
    const double scale_e = 1.0 + inf_norm(w.eq_rhs);
    const double scale_g = 1.0 + inf_norm(w.ineq_rhs);
    const double reg = 1e-8;

    SpMat ineq_t = w.ineq_mat.transpose();
    SpMat eq_t = w.eq_mat.transpose();

    Eigen::SparseLU<SpMat> lu;
    // The augmented KKT is symmetric quasi-definite once regularized, so an
    // unpivoted LDLT with a fill-reducing ordering factors it without the
    // fill explosion SparseLU's partial pivoting causes on saddle systems.
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    bool analyzed = false;
    SpMat k;
    std::vector<Eigen::Index> barrier_pos;  // general-row barrier entries in k
    std::vector<Eigen::Index> diag_pos;     // (1,1)-block diagonal entries in k

    // Single-variable inequality rows (caps, floors, slack nonnegativity) are
    // eliminated into the (1,1)-block diagonal; only multi-variable rows get
    // explicit multiplier unknowns in the factored system.
    std::vector<int> bound_rows, general_rows;
    std::vector<int> bound_var;
    std::vector<double> bound_coeff;
    {
        std::vector<int> row_nnz(static_cast<size_t>(mi), 0);
        std::vector<int> row_var(static_cast<size_t>(mi), 0);
        std::vector<double> row_coeff(static_cast<size_t>(mi), 0.0);
        for (int c = 0; c < w.ineq_mat.outerSize(); ++c)
            for (SpMat::InnerIterator it(w.ineq_mat, c); it; ++it) {
                const auto r = static_cast<size_t>(it.row());
                ++row_nnz[r];
                row_var[r] = static_cast<int>(it.col());
                row_coeff[r] = it.value();
            }
        for (int r = 0; r < mi; ++r) {
            if (row_nnz[static_cast<size_t>(r)] == 1) {
                bound_rows.push_back(r);
                bound_var.push_back(row_var[static_cast<size_t>(r)]);
                bound_coeff.push_back(row_coeff[static_cast<size_t>(r)]);
            } else {
                general_rows.push_back(r);
            }
        }
    }
    const int mb = static_cast<int>(bound_rows.size());
    const int mg = static_cast<int>(general_rows.size());
    SpMat gen_mat(mg, n);
    {
        std::vector<int> gen_of_row(static_cast<size_t>(mi), -1);
        for (int t = 0; t < mg; ++t) gen_of_row[static_cast<size_t>(general_rows[t])] = t;
        std::vector<Eigen::Triplet<double>> trip;
        for (int c = 0; c < w.ineq_mat.outerSize(); ++c)
            for (SpMat::InnerIterator it(w.ineq_mat, c); it; ++it) {
                const int t = gen_of_row[static_cast<size_t>(it.row())];
                if (t >= 0) trip.push_back({t, static_cast<int>(it.col()), it.value()});
            }
        gen_mat.setFromTriplets(trip.begin(), trip.end());
    }
    SpMat gen_t = gen_mat.transpose();
    Eigen::VectorXd q_diag_base(n);
    for (int j = 0; j < n; ++j) q_diag_base(j) = w.q_mat.coeff(j, j);

    auto finish = [&](SolveStatus status, const std::string& msg, int iters) {
        out.status = status;
        out.message = msg;
        out.iterations = iters;
        out.primal.clear();
        for (size_t b = 0; b < program.block_dims_.size(); ++b)
            out.primal.push_back(x.segment(program.block_offsets_[b], program.block_dims_[b]));
        for (size_t r = 0; r < w.row_of_constraint.size(); ++r) {
            auto [is_eq, row] = w.row_of_constraint[r];
            out.duals(static_cast<Eigen::Index>(r)) = is_eq ? y(row) : z(row);
        }
        out.objective_value = w.objective_max_form(x);
        out.kkt_residuals = verify_kkt(program, out);
        return out;
    };

    if (mi == 0) {
        // Equality-constrained QP: one regularized KKT solve.
        SpMat k(n + me, n + me);
        std::vector<Eigen::Triplet<double>> trip;
        for (int i = 0; i < w.q_mat.outerSize(); ++i)
            for (SpMat::InnerIterator it(w.q_mat, i); it; ++it)
                trip.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
        for (int i = 0; i < n; ++i) trip.push_back({i, i, reg});
        for (int i = 0; i < w.eq_mat.outerSize(); ++i)
            for (SpMat::InnerIterator it(w.eq_mat, i); it; ++it) {
                trip.push_back({n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
                trip.push_back({static_cast<int>(it.col()), n + static_cast<int>(it.row()), it.value()});
            }
        for (int i = 0; i < me; ++i) trip.push_back({n + i, n + i, -reg});
        k.setFromTriplets(trip.begin(), trip.end());
        lu.compute(k);
        if (lu.info() != Eigen::Success)
            return finish(SolveStatus::NumericalFailure, "singular KKT system", 0);
        Eigen::VectorXd rhs(n + me);
        rhs.head(n) = -w.cost;
        rhs.tail(me) = w.eq_rhs;
        Eigen::VectorXd sol = lu.solve(rhs);
        x = sol.head(n);
        y = sol.tail(me);
        return finish(SolveStatus::Optimal, "equality-constrained solve", 1);
    }

    double mu = s.dot(z) / mi;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        Eigen::VectorXd rd = w.q_mat * x + w.cost + ineq_t * z;
        if (me > 0) rd += eq_t * y;
        Eigen::VectorXd rp = me > 0 ? Eigen::VectorXd(w.eq_mat * x - w.eq_rhs) : Eigen::VectorXd();
        Eigen::VectorXd rg = w.ineq_mat * x + s - w.ineq_rhs;
        mu = s.dot(z) / mi;

        const double nrd = inf_norm(rd) / scale_d;
        const double nrp = me > 0 ? inf_norm(rp) / scale_e : 0.0;
        const double nrg = inf_norm(rg) / scale_g;
        const double obj_scale = 1.0 + std::abs(w.objective_max_form(x));
        if (options.verbose) {
            std::ostringstream line;
            line << "iter " << iter << " mu " << mu << " rd " << nrd << " rp " << nrp << " rg "
                 << nrg;
            out.message = line.str();
            std::cerr << line.str() << "\n";
        }
        if (nrd <= tol && nrp <= tol && nrg <= tol && mu / obj_scale <= tol)
            return finish(SolveStatus::Optimal, "converged", iter);

        // Divergence heuristics.
        const double dual_mag = inf_norm(z) + (me > 0 ? inf_norm(y) : 0.0);
        if (dual_mag > 1e6) {
            // Farkas certificate: a normalized dual ray with G^T z + E^T y ~ 0
            // and z^T h + y^T d < 0 proves primal infeasibility.
            Eigen::VectorXd ray_z = z / dual_mag;
            Eigen::VectorXd ray_combo = ineq_t * ray_z;
            double ray_obj = ray_z.dot(w.ineq_rhs);
            if (me > 0) {
                Eigen::VectorXd ray_y = y / dual_mag;
                ray_combo += eq_t * ray_y;
                ray_obj += ray_y.dot(w.eq_rhs);
            }
            if (inf_norm(ray_combo) < 1e-4 && ray_obj < -1e-6 &&
                inf_norm(ray_combo) < 1e-2 * std::abs(ray_obj))
                return finish(SolveStatus::Infeasible, "dual ray detected (primal infeasible)",
                              iter);
        }
        if (inf_norm(x) > 1e10 && nrp <= 1e-6 && nrg <= 1e-6)
            return finish(SolveStatus::Unbounded, "primal ray detected", iter);

        // Augmented KKT with bound rows eliminated into the diagonal:
        //   [ Q+W_b+dI   E^T      G_g^T    ] [dx]
        //   [ E         -dI       0        ] [dy]
        //   [ G_g        0      -S_g/Z_g-dI] [dz_g]
        // Keeping multi-variable rows (e.g. scenario-averaged tail rows) as
        // explicit unknowns avoids the dense Schur complement they would
        // otherwise form; bound rows only touch the diagonal. Only diagonal
        // values change between iterations, so the matrix is assembled once
        // and those entries are refreshed in place.
        if (!analyzed) {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(static_cast<size_t>(w.q_mat.nonZeros() + 2 * w.eq_mat.nonZeros() +
                                             2 * gen_mat.nonZeros() + n + me + mg));
            for (int i = 0; i < w.q_mat.outerSize(); ++i)
                for (SpMat::InnerIterator it(w.q_mat, i); it; ++it)
                    trip.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
            for (int i = 0; i < n; ++i) trip.push_back({i, i, reg});
            for (int i = 0; i < w.eq_mat.outerSize(); ++i)
                for (SpMat::InnerIterator it(w.eq_mat, i); it; ++it) {
                    trip.push_back({n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
                    trip.push_back({static_cast<int>(it.col()), n + static_cast<int>(it.row()), it.value()});
                }
            for (int i = 0; i < me; ++i) trip.push_back({n + i, n + i, -reg});
            for (int i = 0; i < gen_mat.outerSize(); ++i)
                for (SpMat::InnerIterator it(gen_mat, i); it; ++it) {
                    trip.push_back(
                        {n + me + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
                    trip.push_back(
                        {static_cast<int>(it.col()), n + me + static_cast<int>(it.row()), it.value()});
                }
            for (int i = 0; i < mg; ++i) trip.push_back({n + me + i, n + me + i, -1.0});
            k.resize(n + me + mg, n + me + mg);
            k.setFromTriplets(trip.begin(), trip.end());
            k.makeCompressed();
            auto value_pos = [&](int row, int col) {
                for (SpMat::InnerIterator it(k, col); it; ++it)
                    if (it.row() == row)
                        return static_cast<Eigen::Index>(&it.valueRef() - k.valuePtr());
                return Eigen::Index(-1);
            };
            barrier_pos.resize(static_cast<size_t>(mg));
            for (int i = 0; i < mg; ++i)
                barrier_pos[static_cast<size_t>(i)] = value_pos(n + me + i, n + me + i);
            diag_pos.resize(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) diag_pos[static_cast<size_t>(j)] = value_pos(j, j);
            ldlt.analyzePattern(k);
            analyzed = true;
        }
        {
            Eigen::VectorXd w_diag = Eigen::VectorXd::Zero(n);
            for (int t = 0; t < mb; ++t) {
                const int r = bound_rows[static_cast<size_t>(t)];
                const double a = bound_coeff[static_cast<size_t>(t)];
                w_diag(bound_var[static_cast<size_t>(t)]) += a * a * z(r) / s(r);
            }
            for (int j = 0; j < n; ++j)
                k.valuePtr()[diag_pos[static_cast<size_t>(j)]] = q_diag_base(j) + reg + w_diag(j);
            for (int t = 0; t < mg; ++t) {
                const int r = general_rows[static_cast<size_t>(t)];
                k.valuePtr()[barrier_pos[static_cast<size_t>(t)]] = -s(r) / z(r) - reg;
            }
        }
        ldlt.factorize(k);
        if (ldlt.info() != Eigen::Success)
            return finish(SolveStatus::NumericalFailure, "KKT factorization failed", iter);

        auto solve_newton = [&](const Eigen::VectorXd& r_sz, Eigen::VectorXd& dx,
                                Eigen::VectorXd& dy, Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
            Eigen::VectorXd rhs(n + me + mg);
            rhs.head(n) = -rd;
            for (int t = 0; t < mb; ++t) {
                const int r = bound_rows[static_cast<size_t>(t)];
                rhs(bound_var[static_cast<size_t>(t)]) -=
                    bound_coeff[static_cast<size_t>(t)] * (z(r) * rg(r) - r_sz(r)) / s(r);
            }
            if (me > 0) rhs.segment(n, me) = -rp;
            for (int t = 0; t < mg; ++t) {
                const int r = general_rows[static_cast<size_t>(t)];
                rhs(n + me + t) = -rg(r) + r_sz(r) / z(r);
            }
            Eigen::VectorXd sol = ldlt.solve(rhs);
            // Two iterative-refinement passes to offset the unpivoted factorization.
            for (int pass = 0; pass < 2; ++pass) {
                Eigen::VectorXd resid = rhs - k * sol;
                sol += ldlt.solve(resid);
            }
            dx = sol.head(n);
            dy = sol.segment(n, me);
            ds = -rg - w.ineq_mat * dx;
            dz.resize(mi);
            for (int t = 0; t < mg; ++t) dz(general_rows[static_cast<size_t>(t)]) = sol(n + me + t);
            for (int t = 0; t < mb; ++t) {
                const int r = bound_rows[static_cast<size_t>(t)];
                dz(r) = (-r_sz(r) - z(r) * ds(r)) / s(r);
            }
        };

        // Predictor.
        Eigen::VectorXd dx, dy, ds, dz;
        solve_newton(s.cwiseProduct(z), dx, dy, ds, dz);
        const double ap_aff = step_to_boundary(s, ds);
        const double ad_aff = step_to_boundary(z, dz);
        const double mu_aff = (s + ap_aff * ds).dot(z + ad_aff * dz) / mi;
        const double sigma = std::min(1.0, std::pow(std::max(mu_aff, 0.0) / mu, 3.0));

        // Corrector.
        Eigen::VectorXd r_sz =
            s.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(mi, sigma * mu);
        solve_newton(r_sz, dx, dy, ds, dz);

        const double frac = 0.995;
        double alpha_p = std::min(1.0, frac * step_to_boundary(s, ds));
        double alpha_d = std::min(1.0, frac * step_to_boundary(z, dz));
        if (std::min(alpha_p, alpha_d) < 1e-3) {
            // Corrector stalled (degenerate blocking pair): retreat to a pure
            // centering step, which always admits a sizable step length.
            solve_newton(s.cwiseProduct(z) - Eigen::VectorXd::Constant(mi, mu), dx, dy, ds, dz);
            alpha_p = std::min(1.0, frac * step_to_boundary(s, ds));
            alpha_d = std::min(1.0, frac * step_to_boundary(z, dz));
        }
        if (options.verbose)
            std::cerr << "  alpha_p " << alpha_p << " alpha_d " << alpha_d << " sigma " << sigma
                      << "\n";
        x += alpha_p * dx;
        if (me > 0) y += alpha_d * dy;
        s += alpha_p * ds;
        z += alpha_d * dz;
    }

    // Out of iterations: classify by the final residuals.
    Eigen::VectorXd rp = me > 0 ? Eigen::VectorXd(w.eq_mat * x - w.eq_rhs) : Eigen::VectorXd();
    Eigen::VectorXd rg = (w.ineq_mat * x - w.ineq_rhs).cwiseMax(0.0);
    const double infeas = std::max(me > 0 ? inf_norm(rp) / scale_e : 0.0, inf_norm(rg) / scale_g);
    if (infeas > 1e-6 && mu < 1e-6)
        return finish(SolveStatus::Infeasible, "iteration cap with persistent primal infeasibility",
                      iter);
    std::ostringstream msg;
    msg << "iteration cap reached; mu " << mu << " infeasibility " << infeas;
    return finish(SolveStatus::NumericalFailure, msg.str(), iter);
}

KktResiduals verify_kkt(const ConvexProgram& program, const SolveOutcome& outcome) {
    SolverWorkspace w(program);
    KktResiduals res;

    // Reconstruct the flat iterate. Hypograph auxiliaries are set to the
    // attained pwl values, matching the converged solver state.
    Eigen::VectorXd x(w.n);
    int offset = 0;
    for (const auto& blockv : outcome.primal) {
        x.segment(offset, blockv.size()) = blockv;
        offset += static_cast<int>(blockv.size());
    }
    for (size_t a = 0; a < program.pwl_terms_.size(); ++a) {
        const auto& term = program.pwl_terms_[a];
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [slope, intercept] : term.segments)
            best = std::min(best, slope * x(term.flat_index) + intercept);
        x(program.total_dim_ + static_cast<int>(a)) = best;
    }

    Eigen::VectorXd y = Eigen::VectorXd::Zero(w.me);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(w.mi);
    for (size_t r = 0; r < w.row_of_constraint.size(); ++r) {
        auto [is_eq, row] = w.row_of_constraint[r];
        (is_eq ? y(row) : z(row)) = outcome.duals(static_cast<Eigen::Index>(r));
    }

    // Stationarity over user-declared variables only; hypograph auxiliaries
    // carry internal multipliers that are not exposed.
    Eigen::VectorXd rd = w.q_mat * x + w.cost;
    if (w.me > 0) rd += w.eq_mat.transpose() * y;
    if (w.mi > 0) rd += w.ineq_mat.transpose() * z;
    std::vector<bool> skip(static_cast<size_t>(w.n), false);
    for (size_t a = 0; a < program.pwl_terms_.size(); ++a) {
        skip[static_cast<size_t>(program.pwl_terms_[a].flat_index)] = true;
        skip[static_cast<size_t>(program.total_dim_ + static_cast<int>(a))] = true;
    }
    for (int i = 0; i < w.n; ++i)
        if (!skip[static_cast<size_t>(i)]) res.stationarity = std::max(res.stationarity, std::abs(rd(i)));

    if (w.me > 0)
        res.feasibility = inf_norm(Eigen::VectorXd(w.eq_mat * x - w.eq_rhs));
    if (w.mi > 0) {
        Eigen::VectorXd slack = w.ineq_rhs - w.ineq_mat * x;
        res.feasibility = std::max(res.feasibility, inf_norm(Eigen::VectorXd((-slack).cwiseMax(0.0))));
        res.dual_feasibility = std::max(0.0, -z.minCoeff());
        res.complementarity = inf_norm(Eigen::VectorXd(z.cwiseProduct(slack)));
    }
    return res;
}

}  // namespace netaccess
