#ifndef HMM_SOLVER_HPP
#define HMM_SOLVER_HPP

#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "hmm/gdm.hpp"
#include "hmm/models.hpp"

namespace hmm {

struct SolverConfig {
    double dt = 0.01;
    double T = 1.0;
    double picard_tol = 1e-10;      // relative update in the discrete gradient norm
    int picard_max = 50;            // cap on linear solves per time step
    double linear_tol = 1e-12;      // relative residual of each linear solve
    bool enforce_step_bound = false;
    double epsilon = 1e-3;          // the eps of dt < 2*lambda/(C_D + eps)
    std::optional<double> coercivity_constant;  // C_D when known, for the bound
    int snapshot_every = 0;         // 0: keep only initial and final states
};

/// One linearised (Picard) step: sparse matrix, right-hand side and the
/// Dirichlet-constrained dofs. Constrained rows are identity rows.
struct StepSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    std::vector<std::pair<int, double>> constraints;  // (dof, prescribed value)
};

struct StepStats {
    int picard_iters = 0;           // linear solves for this step
    long long clamp_events = 0;
};

struct Trajectory {
    std::vector<double> snapshot_times;
    std::vector<DofVector> snapshots;  // at least the initial and final state
    std::vector<StepStats> steps;      // one entry per time step
    bool step_bound_warning = false;

    const DofVector& final_state() const { return snapshots.back(); }
    int max_picard_iters() const;
    long long total_clamp_events() const;
};

/// Assembles the linear system of one Picard iteration of the implicit step
/// ending at t_next: mass/dt + diffusion + convection frozen at `frozen`,
/// reaction frozen on the right-hand side, boundary faces pinned to the
/// model trace at t_next. Throws DimensionMismatch.
StepSystem assemble_step(const Discretization& disc, const ModelSpec& model,
                         const DofVector& prev, const DofVector& frozen, double t_next,
                         double dt);

/// Direct sparse solve of an assembled system. Throws LinearSolveFailed when
/// the factorization fails or the relative residual exceeds `tol`.
DofVector solve_linear(const StepSystem& system, double tol = 1e-12);

/// Fixed-point iteration of assemble_step/solve until the relative update in
/// the discrete gradient norm drops below cfg.picard_tol. Throws
/// PicardDiverged / LinearSolveFailed.
std::pair<DofVector, StepStats> picard_step(const Discretization& disc, const ModelSpec& model,
                                            const DofVector& prev, double t_next,
                                            const SolverConfig& cfg);

/// Full implicit time loop from J_D of the initial data to T.
Trajectory run(const Discretization& disc, const ModelSpec& model, const SolverConfig& cfg);

/// Trajectory CSV: step,time,picard_iters,clamp_events.
void export_trajectory_csv(const Trajectory& traj, double dt, std::ostream& out);

/// Dof values in mesh id order (cells then faces), one per line.
void write_dofs(const DofVector& dofs, std::ostream& out);

} // namespace hmm

#endif
