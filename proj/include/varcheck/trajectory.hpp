#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "varcheck/expr.hpp"

namespace varcheck {

/// Boundary data for the second-order problem: x and xd fixed at both ends.
struct BoundaryData {
    std::vector<double> x_a, x_b, xd_a, xd_b;
};

struct Problem {
    double a = 0.0;
    double b = 1.0;
    int n = 1;
    LagrangianExpr lagrangian;
    BoundaryData bc;
};

/// C1 piecewise-cubic Hermite curve on a strictly increasing mesh.
/// Second derivatives are piecewise linear; at interior knots evaluation
/// takes the right-limit.
struct Trajectory {
    std::vector<double> mesh;    // K+1 knots, strictly increasing
    std::vector<double> values;  // (K+1) * n, row-major per knot
    std::vector<double> slopes;  // (K+1) * n
    int n = 1;

    int interval_count() const { return static_cast<int>(mesh.size()) - 1; }
    int knot_count() const { return static_cast<int>(mesh.size()); }

    std::span<const double> value_row(int k) const { return {values.data() + (std::size_t)k * n, (std::size_t)n}; }
    std::span<const double> slope_row(int k) const { return {slopes.data() + (std::size_t)k * n, (std::size_t)n}; }

    /// Index of the interval containing t (right-limit convention; t == b maps
    /// to the last interval). Throws if t is outside [a, b].
    int locate(double t) const;

    /// Evaluate x, xd, xdd at t into spans of length n.
    void evaluate(double t, std::span<double> x, std::span<double> xd,
                  std::span<double> xdd) const;

    EvalPoint at(double t) const;
};

struct SobolevNorms {
    double norm2_x = 0.0;    // L2 norm of |x|
    double norm2_xd = 0.0;   // L2 norm of |xd|
    double norm2_xdd = 0.0;  // L2 norm of |xdd|
    double ess_sup_xdd = 0.0;
};

SobolevNorms sobolev_norms(const Trajectory& traj);

/// Bisect every interval; the child evaluates identically to the parent.
Trajectory refine(const Trajectory& traj);

/// Arc-length map s(t) = integral of sqrt(1+|xd|^2) and helpers to invert it.
/// Construction integrates with Gauss-Legendre panels; time_at polishes the
/// inverse with Newton steps so it is quadrature-accurate, not interpolation-
/// accurate.
class ArcLength {
public:
    explicit ArcLength(const Trajectory& traj);

    double length() const { return knot_s_.back(); }
    double s_at(double t) const;
    double speed_at(double t) const;  // s'(t) = sqrt(1 + |xd|^2)
    double time_at(double s, double guess) const;
    double time_at(double s) const;
    std::span<const double> knot_s() const { return knot_s_; }

private:
    const Trajectory& traj_;
    std::vector<double> knot_s_;
};

/// Tabulated arc-length chart: s(t) samples, and the inverse map with its
/// first two derivatives on a uniform s-grid.
struct ArcLengthChart {
    std::vector<double> grid_t;  // chart sample times (8 per mesh interval)
    std::vector<double> grid_s;  // s(t) at grid_t
    double length = 0.0;

    std::vector<double> s_uniform;     // uniform grid of `samples` points on [0, l]
    std::vector<double> t_of_s;        // inverse map at s_uniform
    std::vector<double> tprime_of_s;   // 1/sqrt(1+|xd|^2) at t_of_s
    std::vector<double> tsecond_of_s;  // -(xd.xdd)/(1+|xd|^2)^2 at t_of_s

    // monotone cubic t(s) over (grid_s, grid_t)
    std::vector<double> inverse_slopes;

    /// Evaluate the tabulated monotone-cubic inverse at any s in [0, l].
    double invert(double s) const;
};

ArcLengthChart arc_length_chart(const Trajectory& traj, int samples);

std::vector<double> make_uniform_mesh(double a, double b, int intervals);

/// Geometric mesh clustered toward `a` with ratio 2: band widths double away
/// from the singular end; each band split into `subdiv` equal intervals.
std::vector<double> make_graded_mesh(double a, double b, int bands, int subdiv = 1);

/// Sample a trajectory from callables giving value and slope vectors at t.
Trajectory sample_trajectory(std::vector<double> mesh, int n,
                             const std::function<std::vector<double>(double)>& value,
                             const std::function<std::vector<double>(double)>& slope);

/// Overwrite boundary rows with the problem's boundary data (bit-exact).
void apply_boundary(Trajectory& traj, const Problem& p);

bool boundary_matches(const Trajectory& traj, const Problem& p);

/// CSV with header "t,x1..xn,xd1..xdn", one row per knot, 17 significant digits.
void save_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory_csv(const std::string& path);
std::string trajectory_csv_string(const Trajectory& traj);

}  // namespace varcheck
