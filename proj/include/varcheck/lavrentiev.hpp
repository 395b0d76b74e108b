#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varcheck/solver.hpp"

namespace varcheck {

struct GapLevel {
    int intervals = 0;
    double J_unconstrained = 0.0;
    double J_capped = 0.0;
    double cap = 0.0;
    double penalty_mu = 0.0;
    double max_abs_xdd_unconstrained = 0.0;
    bool converged_unconstrained = false;
    bool converged_capped = false;
};

/// Refined-mesh comparison of the unconstrained infimum against the
/// penalty-capped one. A positive, refinement-stable gap is evidence only,
/// never proof.
struct GapReport {
    std::vector<GapLevel> levels;
    double gap_estimate = 0.0;  // finest-level J_capped - J_unconstrained
    std::optional<double> singular_seed_value;
    Trajectory unconstrained_trajectory;
    Trajectory capped_trajectory;
    bool all_converged() const {
        for (const auto& l : levels)
            if (!l.converged_unconstrained || !l.converged_capped) return false;
        return true;
    }
};

/// Run the unconstrained and capped legs level by level; the capped leg's
/// penalty weight doubles per refinement level. When a seed trajectory is
/// given, its objective is recorded and the unconstrained leg also restarts
/// from it, keeping the better of the two runs per level.
GapReport probe_gap(const Problem& p, const SolveOptions& opts, double cap,
                    const std::optional<Trajectory>& seed = std::nullopt);

/// One probe per cap, in order.
std::vector<GapReport> cap_sweep(const Problem& p, const SolveOptions& opts,
                                 const std::vector<double>& caps);

std::string gap_report_json(const GapReport& report);
/// CSV "level,K,J_unc,J_cap,max_abs_xdd".
std::string gap_report_csv(const GapReport& report);

}  // namespace varcheck
