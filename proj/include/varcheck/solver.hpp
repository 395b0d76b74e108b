#pragma once

#include <optional>
#include <vector>

#include "varcheck/trajectory.hpp"

namespace varcheck {

struct SolveOptions {
    double grad_tol = 1e-10;   // stop when sup-norm of the gradient drops below
    int max_iters = 2000;
    int quad_order = 5;        // Gauss points per interval; one of {3,5,7}
    int refinements = 0;
    int initial_mesh = 16;     // K0 intervals
    std::optional<double> cap; // |xdd| bound enforced by quadratic penalty
    double penalty_mu = 0.0;
};

struct SolveLevel {
    int intervals = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct SolveReport {
    std::vector<SolveLevel> levels;
    Trajectory trajectory;
    bool all_converged() const {
        for (const auto& l : levels)
            if (!l.converged) return false;
        return true;
    }
};

struct MinimizeResult {
    Trajectory trajectory;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    double grad_norm = 0.0;
};

/// Composite Gauss-Legendre quadrature of L along the trajectory, plus the
/// cap penalty when opts carries one. Deterministic: interval-major,
/// point-minor enumeration reduced by pairwise summation.
double objective(const Problem& p, const Trajectory& traj, const SolveOptions& opts);

/// Exact gradient of the quadrature objective with respect to the free dofs:
/// interior knot values then interior slopes, n components each, knot-major.
std::vector<double> gradient(const Problem& p, const Trajectory& traj, const SolveOptions& opts);

/// Limited-memory quasi-Newton descent with Armijo backtracking.
MinimizeResult minimize(const Problem& p, const Trajectory& init, const SolveOptions& opts);

/// Solve on the initial mesh, then refine-and-resolve `refinements` times.
SolveReport solve_refined(const Problem& p, const SolveOptions& opts);
SolveReport solve_refined(const Problem& p, const Trajectory& init, const SolveOptions& opts);

/// The unique cubic satisfying all four boundary conditions, sampled on mesh.
Trajectory boundary_cubic_init(const Problem& p, const std::vector<double>& mesh);

/// Straight line between the boundary values; interior slopes equal the
/// secant, boundary slopes from bc.
Trajectory line_init(const Problem& p, const std::vector<double>& mesh);

}  // namespace varcheck
