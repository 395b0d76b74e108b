#pragma once

#include <string>
#include <vector>

#include "varcheck/trajectory.hpp"

namespace varcheck {

/// Arguments of the reparameterized integrand F at one arc-length sample:
/// theta(s) = (t, X, t', X', t'', X'').
struct ReparamPoint {
    double t = 0.0;
    std::vector<double> X;
    double tprime = 1.0;
    std::vector<double> Xprime;
    double tsecond = 0.0;
    std::vector<double> Xsecond;
};

/// F and all first partials of F(t, x, t', x', t'', x'') where
/// F = L(t, x, x'/t', (x'' - (x'/t') t'')/t'^2) * t'.
struct FPartials {
    double F = 0.0;
    double dt = 0.0;
    double dtprime = 0.0;
    double dtsecond = 0.0;
    std::vector<double> dx;
    std::vector<double> dxprime;
    std::vector<double> dxsecond;
};

FPartials F_partials(const LagrangianExpr& L, const ReparamPoint& q);

/// Sampled first-integral profile with its constancy metrics.
struct ConditionProfile {
    std::vector<double> s_grid;
    std::vector<double> values;
    double c_hat = 0.0;     // median over the trimmed grid
    double deviation = 0.0; // (max - min) / (1 + |median|) over the trimmed grid
    bool singular_endpoint = false;
};

/// duBois-Reymond first integral along traj, sampled on a uniform s-grid of
/// grid_size points. Constant (up to discretization) along minimizers.
ConditionProfile dbr_profile(const Problem& p, const Trajectory& traj,
                             const ArcLengthChart& chart, int grid_size);

/// Euler-Lagrange first integral for component i (1-based).
ConditionProfile el_profile(const Problem& p, const Trajectory& traj,
                            const ArcLengthChart& chart, int component, int grid_size);

struct ClassicalResiduals {
    std::vector<double> t_samples;
    // Euler-Lagrange residual dL/dx - d/dt(dL/dxd) + d2/dt2(dL/dxdd), per
    // component at each sample (sample-major).
    std::vector<double> el_residual;
    // L - xd.dL/dxd - xdd.dL/dxdd + xd.(d/dt dL/dxdd)
    std::vector<double> dbr_values;
};

/// Smooth-case pointwise forms, with the time derivatives taken by central
/// finite differences along the trajectory; samples avoid the knots.
ClassicalResiduals classical_residuals(const Problem& p, const Trajectory& traj, int grid_size);

/// "# c_hat=<v> deviation=<v>" metadata line followed by "s,phi" rows.
std::string profile_csv_string(const ConditionProfile& profile);

}  // namespace varcheck
