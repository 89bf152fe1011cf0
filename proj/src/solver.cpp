#include "hmm/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <ostream>

#include "hmm/errors.hpp"

namespace hmm {

int Trajectory::max_picard_iters() const {
    int m = 0;
    for (const StepStats& s : steps) m = std::max(m, s.picard_iters);
    return m;
}

long long Trajectory::total_clamp_events() const {
    long long n = 0;
    for (const StepStats& s : steps) n += s.clamp_events;
    return n;
}

namespace {

using Triplet = Eigen::Triplet<double>;

void append_mass_diffusion(const Discretization& disc, const ModelSpec& model, double dt,
                           std::vector<Triplet>& trip) {
    const PolytopalMesh& mesh = disc.mesh();
    for (int c = 0; c < disc.n_cells(); ++c)
        trip.emplace_back(disc.cell_dof(c), disc.cell_dof(c), mesh.cells[c].area / dt);
    for (int c = 0; c < disc.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        const int m = disc.n_cell_faces(c);
        const Eigen::MatrixXd A = disc.local_diffusion_matrix(c, model.lambda);
        std::vector<int> dof(m + 1);
        dof[0] = disc.cell_dof(c);
        for (int i = 0; i < m; ++i) dof[i + 1] = disc.face_dof(cell.face_ids[i]);
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= m; ++j)
                if (A(i, j) != 0.0) trip.emplace_back(dof[i], dof[j], A(i, j));
    }
}

// Convection tested against cell indicators:
//   |K| g(u_K) conv_dir . G_K(c) = g(u_K) sum_sigma |sigma| (conv_dir . n) c_sigma.
void append_convection(const Discretization& disc, const ModelSpec& model,
                       const DofVector& frozen, std::vector<Triplet>& trip) {
    if (model.conv_dir.isZero()) return;
    const PolytopalMesh& mesh = disc.mesh();
    for (int c = 0; c < disc.n_cells(); ++c) {
        const double gu = model.g(frozen[disc.cell_dof(c)]);
        if (gu == 0.0) continue;
        const Cell& cell = mesh.cells[c];
        for (int i = 0; i < disc.n_cell_faces(c); ++i) {
            const Face& face = mesh.faces[cell.face_ids[i]];
            const double v = gu * face.measure * model.conv_dir.dot(disc.outward_normal(c, i));
            if (v != 0.0) trip.emplace_back(disc.cell_dof(c), disc.face_dof(cell.face_ids[i]), v);
        }
    }
}

Eigen::VectorXd unconstrained_rhs(const Discretization& disc, const ModelSpec& model,
                                  const DofVector& prev, const DofVector& frozen, double dt) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(disc.n_dofs());
    const PolytopalMesh& mesh = disc.mesh();
    for (int c = 0; c < disc.n_cells(); ++c) {
        const double area = mesh.cells[c].area;
        b[disc.cell_dof(c)] =
            area / dt * prev[disc.cell_dof(c)] + area * model.f(frozen[disc.cell_dof(c)]);
    }
    return b;
}

std::vector<std::pair<int, double>> boundary_constraints(const Discretization& disc,
                                                         const ModelSpec& model, double t) {
    std::vector<std::pair<int, double>> cons;
    cons.reserve(disc.boundary_faces().size());
    for (int f : disc.boundary_faces())
        cons.emplace_back(disc.face_dof(f),
                          model.boundary_trace(disc.mesh().faces[f].midpoint, t));
    return cons;
}

} // namespace

StepSystem assemble_step(const Discretization& disc, const ModelSpec& model,
                         const DofVector& prev, const DofVector& frozen, double t_next,
                         double dt) {
    if (prev.size() != disc.n_dofs() || frozen.size() != disc.n_dofs())
        throw DimensionMismatch("dof vector size does not match the discretisation");

    std::vector<Triplet> raw;
    append_mass_diffusion(disc, model, dt, raw);
    append_convection(disc, model, frozen, raw);
    Eigen::VectorXd b = unconstrained_rhs(disc, model, prev, frozen, dt);
    auto cons = boundary_constraints(disc, model, t_next);

    std::vector<char> constrained(disc.n_dofs(), 0);
    Eigen::VectorXd value = Eigen::VectorXd::Zero(disc.n_dofs());
    for (const auto& [d, v] : cons) {
        constrained[d] = 1;
        value[d] = v;
    }

    std::vector<Triplet> trip;
    trip.reserve(raw.size() + cons.size());
    for (const Triplet& t : raw) {
        if (constrained[t.row()]) continue;
        if (constrained[t.col()])
            b[t.row()] -= t.value() * value[t.col()];
        else
            trip.push_back(t);
    }
    for (const auto& [d, v] : cons) {
        trip.emplace_back(d, d, 1.0);
        b[d] = v;
    }

    StepSystem sys;
    sys.matrix.resize(disc.n_dofs(), disc.n_dofs());
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.rhs = std::move(b);
    sys.constraints = std::move(cons);
    return sys;
}

DofVector solve_linear(const StepSystem& system, double tol) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system.matrix);
    if (lu.info() != Eigen::Success)
        throw LinearSolveFailed("sparse LU factorization failed: " + lu.lastErrorMessage());
    DofVector x = lu.solve(system.rhs);
    const double bnorm = system.rhs.norm();
    const double res = (system.rhs - system.matrix * x).norm();
    if (!(res <= tol * std::max(bnorm, 1e-300)) && res > 1e-300)
        throw LinearSolveFailed("linear solve residual " + std::to_string(res) +
                                " exceeds tolerance");
    return x;
}

namespace {

// One-time-step engine. The mass + diffusion block and its factorization are
// reused across Picard iterations and time steps; the convection block (cell
// rows only, entries O(h)) is applied by defect correction against that
// factorization, with a full refactorization as fallback.
class Stepper {
public:
    Stepper(const Discretization& disc, const ModelSpec& model, const SolverConfig& cfg)
        : disc_(disc), model_(model), cfg_(cfg) {
        const int n = disc.n_dofs();
        constrained_.assign(n, 0);
        for (int f : disc.boundary_faces()) constrained_[disc.face_dof(f)] = 1;

        std::vector<Triplet> raw;
        append_mass_diffusion(disc, model, cfg.dt, raw);
        std::vector<Triplet> base, moved;
        for (const Triplet& t : raw) {
            if (constrained_[t.row()]) continue;
            (constrained_[t.col()] ? moved : base).push_back(t);
        }
        for (int d = 0; d < n; ++d)
            if (constrained_[d]) base.emplace_back(d, d, 1.0);
        base_.resize(n, n);
        base_.setFromTriplets(base.begin(), base.end());
        column_moves_.resize(n, n);
        column_moves_.setFromTriplets(moved.begin(), moved.end());
        lu_.compute(base_);
        if (lu_.info() != Eigen::Success)
            throw LinearSolveFailed("sparse LU factorization failed: " + lu_.lastErrorMessage());
    }

    std::pair<DofVector, StepStats> step(const DofVector& prev, double t_next) {
        if (prev.size() != disc_.n_dofs())
            throw DimensionMismatch("dof vector size does not match the discretisation");
        const long long clamps_before = model_.clamp_events();

        Eigen::VectorXd bvals = Eigen::VectorXd::Zero(disc_.n_dofs());
        for (int f : disc_.boundary_faces())
            bvals[disc_.face_dof(f)] =
                model_.boundary_trace(disc_.mesh().faces[f].midpoint, t_next);

        DofVector iterate = prev;
        for (int f : disc_.boundary_faces())
            iterate[disc_.face_dof(f)] = bvals[disc_.face_dof(f)];

        StepStats stats;
        double prev_update = -1.0;
        for (int k = 1; k <= cfg_.picard_max; ++k) {
            const DofVector frozen = iterate;
            const DofVector next = solve_one(prev, frozen, bvals, iterate);
            ++stats.picard_iters;
            const double update = disc_.gradient_norm(next - frozen);
            const double scale = std::max(disc_.gradient_norm(next), 1e-30);
            iterate = next;
            if (update / scale < cfg_.picard_tol) {
                stats.clamp_events = model_.clamp_events() - clamps_before;
                return {iterate, stats};
            }
            if (prev_update >= 0.0 && update > 10.0 * prev_update && k > 3)
                throw PicardDiverged("picard iteration diverging (update norm growing)", -1);
            prev_update = update;
        }
        throw PicardDiverged("picard iteration cap reached without convergence", -1);
    }

private:
    DofVector solve_one(const DofVector& prev, const DofVector& frozen,
                        const Eigen::VectorXd& bvals, const DofVector& guess) {
        std::vector<Triplet> conv_raw;
        append_convection(disc_, model_, frozen, conv_raw);
        Eigen::VectorXd b = unconstrained_rhs(disc_, model_, prev, frozen, cfg_.dt);
        std::vector<Triplet> conv;
        conv.reserve(conv_raw.size());
        for (const Triplet& t : conv_raw) {
            if (constrained_[t.col()])
                b[t.row()] -= t.value() * bvals[t.col()];
            else
                conv.push_back(t);
        }
        Eigen::SparseMatrix<double> C(disc_.n_dofs(), disc_.n_dofs());
        C.setFromTriplets(conv.begin(), conv.end());
        b -= column_moves_ * bvals;
        for (int d = 0; d < disc_.n_dofs(); ++d)
            if (constrained_[d]) b[d] = bvals[d];

        const double btarget = cfg_.linear_tol * std::max(b.norm(), 1e-30);
        DofVector x = guess;
        for (int it = 0; it < 100; ++it) {
            const Eigen::VectorXd r = b - base_ * x - C * x;
            if (r.norm() <= btarget) return x;
            x += lu_.solve(r);
        }
        // Defect correction stalled; refactorize the full matrix.
        Eigen::SparseMatrix<double> A = base_ + C;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> full;
        full.compute(A);
        if (full.info() != Eigen::Success)
            throw LinearSolveFailed("sparse LU factorization failed: " + full.lastErrorMessage());
        x = full.solve(b);
        if (!((b - A * x).norm() <= btarget))
            throw LinearSolveFailed("linear solve residual exceeds tolerance");
        return x;
    }

    const Discretization& disc_;
    const ModelSpec& model_;
    const SolverConfig& cfg_;
    std::vector<char> constrained_;
    Eigen::SparseMatrix<double> base_;          // mass/dt + diffusion, Dirichlet rows folded
    Eigen::SparseMatrix<double> column_moves_;  // base entries hitting constrained columns
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

} // namespace

std::pair<DofVector, StepStats> picard_step(const Discretization& disc, const ModelSpec& model,
                                            const DofVector& prev, double t_next,
                                            const SolverConfig& cfg) {
    if (!(cfg.dt > 0.0) || cfg.picard_max < 1 || !(cfg.picard_tol > 0.0))
        throw ValidationError("invalid solver configuration");
    Stepper stepper(disc, model, cfg);
    return stepper.step(prev, t_next);
}

Trajectory run(const Discretization& disc, const ModelSpec& model, const SolverConfig& cfg) {
    if (!(cfg.dt > 0.0) || !(cfg.T >= cfg.dt))
        throw ValidationError("require dt > 0 and T >= dt");
    const long long n_steps = std::llround(cfg.T / cfg.dt);
    if (std::abs(double(n_steps) * cfg.dt - cfg.T) > 1e-9 * cfg.T)
        throw ValidationError("T must be an integer multiple of dt");

    Trajectory traj;
    if (cfg.enforce_step_bound && cfg.coercivity_constant) {
        const double bound = 2.0 * model.lambda / (*cfg.coercivity_constant + cfg.epsilon);
        if (cfg.dt >= bound) {
            traj.step_bound_warning = true;
            std::cerr << "warning: dt = " << cfg.dt << " >= 2*lambda/(C_D + eps) = " << bound
                      << "; the fixed point map may not contract\n";
        }
    }

    DofVector state = disc.interpolate_initial(model.initial);
    for (int f : disc.boundary_faces())
        state[disc.face_dof(f)] = model.boundary_trace(disc.mesh().faces[f].midpoint, 0.0);
    traj.snapshot_times.push_back(0.0);
    traj.snapshots.push_back(state);

    Stepper stepper(disc, model, cfg);
    for (long long m = 1; m <= n_steps; ++m) {
        const double t = double(m) * cfg.dt;
        try {
            auto [next, stats] = stepper.step(state, t);
            state = std::move(next);
            traj.steps.push_back(stats);
        } catch (const PicardDiverged& e) {
            throw PicardDiverged(std::string(e.what()) + " at step " + std::to_string(m),
                                 static_cast<int>(m));
        } catch (const LinearSolveFailed& e) {
            throw LinearSolveFailed(std::string(e.what()) + " at step " + std::to_string(m));
        }
        const bool last = (m == n_steps);
        if (last || (cfg.snapshot_every > 0 && m % cfg.snapshot_every == 0)) {
            traj.snapshot_times.push_back(t);
            traj.snapshots.push_back(state);
        }
    }
    return traj;
}

void export_trajectory_csv(const Trajectory& traj, double dt, std::ostream& out) {
    out << "step,time,picard_iters,clamp_events\n";
    for (size_t m = 0; m < traj.steps.size(); ++m) {
        out << (m + 1) << "," << double(m + 1) * dt << "," << traj.steps[m].picard_iters << ","
            << traj.steps[m].clamp_events << "\n";
    }
}

void write_dofs(const DofVector& dofs, std::ostream& out) {
    out.precision(17);
    for (Eigen::Index i = 0; i < dofs.size(); ++i) out << dofs[i] << "\n";
}

} // namespace hmm
