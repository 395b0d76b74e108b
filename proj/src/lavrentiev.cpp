#include "varcheck/lavrentiev.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace varcheck {

namespace {

struct LegState {
    Trajectory current;
    MinimizeResult last;
};

}  // namespace

GapReport probe_gap(const Problem& p, const SolveOptions& opts, double cap,
                    const std::optional<Trajectory>& seed) {
    if (!(cap > 0.0)) throw std::invalid_argument("cap must be positive");
    GapReport report;

    SolveOptions unc = opts;
    unc.cap.reset();
    unc.penalty_mu = 0.0;

    LegState unc_leg{boundary_cubic_init(p, make_uniform_mesh(p.a, p.b, opts.initial_mesh)), {}};
    std::optional<LegState> seed_leg;
    if (seed) {
        SolveOptions probe = unc;
        report.singular_seed_value = objective(p, *seed, probe);
        seed_leg = LegState{*seed, {}};
    }
    LegState cap_leg{unc_leg.current, {}};

    const bool capped_active = opts.penalty_mu > 0.0;
    double mu = opts.penalty_mu;

    for (int level = 0; level <= opts.refinements; ++level) {
        if (level > 0) {
            unc_leg.current = refine(unc_leg.current);
            cap_leg.current = refine(cap_leg.current);
            if (seed_leg) seed_leg->current = refine(seed_leg->current);
            mu *= 2.0;  // stiffen the soft cap as the mesh resolves it
        }

        unc_leg.last = minimize(p, unc_leg.current, unc);
        unc_leg.current = unc_leg.last.trajectory;
        double J_unc = unc_leg.last.objective;
        bool conv_unc = unc_leg.last.converged;
        const Trajectory* best_unc = &unc_leg.current;
        if (seed_leg) {
            seed_leg->last = minimize(p, seed_leg->current, unc);
            seed_leg->current = seed_leg->last.trajectory;
            if (seed_leg->last.objective < J_unc) {
                J_unc = seed_leg->last.objective;
                conv_unc = seed_leg->last.converged;
                best_unc = &seed_leg->current;
            }
        }

        GapLevel row;
        row.intervals = unc_leg.current.interval_count();
        row.cap = cap;
        row.penalty_mu = capped_active ? mu : 0.0;
        row.J_unconstrained = J_unc;
        row.converged_unconstrained = conv_unc;
        row.max_abs_xdd_unconstrained = sobolev_norms(*best_unc).ess_sup_xdd;

        if (capped_active) {
            SolveOptions capped = opts;
            capped.cap = cap;
            capped.penalty_mu = mu;
            cap_leg.last = minimize(p, cap_leg.current, capped);
            cap_leg.current = cap_leg.last.trajectory;
            row.J_capped = cap_leg.last.objective;
            row.converged_capped = cap_leg.last.converged;
        } else {
            // penalty off: the capped leg is the same optimization run
            cap_leg.current = unc_leg.current;
            row.J_capped = unc_leg.last.objective;
            row.converged_capped = unc_leg.last.converged;
        }
        report.levels.push_back(row);
    }

    report.gap_estimate =
        report.levels.back().J_capped - report.levels.back().J_unconstrained;
    report.unconstrained_trajectory = unc_leg.current;
    if (seed_leg && seed_leg->last.objective < unc_leg.last.objective)
        report.unconstrained_trajectory = seed_leg->current;
    report.capped_trajectory = cap_leg.current;
    return report;
}

std::vector<GapReport> cap_sweep(const Problem& p, const SolveOptions& opts,
                                 const std::vector<double>& caps) {
    if (caps.empty()) throw std::invalid_argument("cap sweep needs at least one cap");
    for (std::size_t i = 1; i < caps.size(); ++i)
        if (!(caps[i] > caps[i - 1]))
            throw std::invalid_argument("caps must be strictly increasing");
    std::vector<GapReport> out;
    out.reserve(caps.size());
    for (double cap : caps) out.push_back(probe_gap(p, opts, cap));
    return out;
}

std::string gap_report_json(const GapReport& report) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (const auto& l : report.levels) {
        levels.push_back({{"K", l.intervals},
                          {"J_unconstrained", l.J_unconstrained},
                          {"J_capped", l.J_capped},
                          {"cap", l.cap},
                          {"penalty_mu", l.penalty_mu},
                          {"max_abs_xdd_unconstrained", l.max_abs_xdd_unconstrained},
                          {"converged_unconstrained", l.converged_unconstrained},
                          {"converged_capped", l.converged_capped}});
    }
    j["levels"] = levels;
    j["gap_estimate"] = report.gap_estimate;
    j["singular_seed_value"] = report.singular_seed_value
                                   ? nlohmann::ordered_json(*report.singular_seed_value)
                                   : nlohmann::ordered_json(nullptr);
    return j.dump(2);
}

std::string gap_report_csv(const GapReport& report) {
    std::string out = "level,K,J_unc,J_cap,max_abs_xdd\n";
    std::array<char, 160> buf{};
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        const auto& l = report.levels[i];
        std::snprintf(buf.data(), buf.size(), "%zu,%d,%.17g,%.17g,%.17g\n", i, l.intervals,
                      l.J_unconstrained, l.J_capped, l.max_abs_xdd_unconstrained);
        out += buf.data();
    }
    return out;
}

}  // namespace varcheck
