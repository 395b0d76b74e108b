#include "varcheck/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "varcheck/quadrature.hpp"

namespace varcheck {

namespace {

struct Basis {
    std::array<double, 4> x, xd, xdd;  // weights against (x0, s0, x1, s1)
};

Basis basis_at(double u, double h) {
    const double u2 = u * u;
    const double u3 = u2 * u;
    Basis w;
    w.x = {2 * u3 - 3 * u2 + 1, h * (u3 - 2 * u2 + u), -2 * u3 + 3 * u2, h * (u3 - u2)};
    w.xd = {(6 * u2 - 6 * u) / h, 3 * u2 - 4 * u + 1, (-6 * u2 + 6 * u) / h, 3 * u2 - 2 * u};
    w.xdd = {(12 * u - 6) / (h * h), (6 * u - 4) / h, (-12 * u + 6) / (h * h), (6 * u - 2) / h};
    return w;
}

// Free dofs: interior knot values then the interior slope, per knot:
// [x_1 .. x_{K-1}, s_1 .. s_{K-1}] interleaved knot-major as
// (values of knot k, slopes of knot k) for k = 1..K-1.
std::size_t dof_count(const Trajectory& traj) {
    return static_cast<std::size_t>(traj.interval_count() - 1) * 2 * traj.n;
}

void extract_dofs(const Trajectory& traj, std::vector<double>& dofs) {
    const int n = traj.n;
    dofs.clear();
    dofs.reserve(dof_count(traj));
    for (int k = 1; k < traj.interval_count(); ++k) {
        for (int i = 0; i < n; ++i) dofs.push_back(traj.values[(std::size_t)k * n + i]);
        for (int i = 0; i < n; ++i) dofs.push_back(traj.slopes[(std::size_t)k * n + i]);
    }
}

void inject_dofs(Trajectory& traj, const std::vector<double>& dofs) {
    const int n = traj.n;
    std::size_t j = 0;
    for (int k = 1; k < traj.interval_count(); ++k) {
        for (int i = 0; i < n; ++i) traj.values[(std::size_t)k * n + i] = dofs[j++];
        for (int i = 0; i < n; ++i) traj.slopes[(std::size_t)k * n + i] = dofs[j++];
    }
}

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void check_admissible(const Problem& p, const Trajectory& traj) {
    if (traj.n != p.n) throw std::invalid_argument("trajectory dimension mismatch");
    if (traj.mesh.front() != p.a || traj.mesh.back() != p.b)
        throw std::invalid_argument("trajectory mesh does not span [a, b]");
    if (!boundary_matches(traj, p))
        throw std::invalid_argument("trajectory boundary rows do not match problem bc");
}

}  // namespace

double objective(const Problem& p, const Trajectory& traj, const SolveOptions& opts) {
    const int K = traj.interval_count();
    const int n = traj.n;
    GaussRule rule = gauss_rule(opts.quad_order);
    const bool capped = opts.cap.has_value() && opts.penalty_mu > 0.0;
    const double M = capped ? *opts.cap : 0.0;

    std::vector<double> contributions;
    contributions.reserve((std::size_t)K * rule.nodes.size());
    EvalPoint pt;
    pt.x.resize(n);
    pt.xd.resize(n);
    pt.xdd.resize(n);
    for (int k = 0; k < K; ++k) {
        const double t0 = traj.mesh[k];
        const double t1 = traj.mesh[k + 1];
        const double mid = 0.5 * (t0 + t1);
        const double half = 0.5 * (t1 - t0);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = mid + half * rule.nodes[q];
            traj.evaluate(t, pt.x, pt.xd, pt.xdd);
            pt.t = t;
            double val;
            try {
                val = p.lagrangian.eval(pt);
            } catch (const EvalDomainError& err) {
                throw EvalDomainError(std::string(err.what()) + " at t = " + std::to_string(t),
                                      err.node_offset());
            }
            if (capped) {
                double a2 = 0.0;
                for (double v : pt.xdd) a2 += v * v;
                const double excess = std::sqrt(a2) - M;
                if (excess > 0.0) val += opts.penalty_mu * excess * excess;
            }
            contributions.push_back(half * rule.weights[q] * val);
        }
    }
    return pairwise_sum(contributions);
}

std::vector<double> gradient(const Problem& p, const Trajectory& traj, const SolveOptions& opts) {
    const int K = traj.interval_count();
    const int n = traj.n;
    GaussRule rule = gauss_rule(opts.quad_order);
    const bool capped = opts.cap.has_value() && opts.penalty_mu > 0.0;
    const double M = capped ? *opts.cap : 0.0;

    // dJ/d(knot value), dJ/d(knot slope) for all knots; boundary rows dropped
    // at the end.
    std::vector<double> gx((std::size_t)(K + 1) * n, 0.0);
    std::vector<double> gs((std::size_t)(K + 1) * n, 0.0);
    EvalPoint pt;
    pt.x.resize(n);
    pt.xd.resize(n);
    pt.xdd.resize(n);
    for (int k = 0; k < K; ++k) {
        const double t0 = traj.mesh[k];
        const double t1 = traj.mesh[k + 1];
        const double h = t1 - t0;
        const double mid = 0.5 * (t0 + t1);
        const double half = 0.5 * h;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = mid + half * rule.nodes[q];
            traj.evaluate(t, pt.x, pt.xd, pt.xdd);
            pt.t = t;
            Partials d;
            try {
                d = p.lagrangian.partials(pt);
            } catch (const EvalDomainError& err) {
                throw EvalDomainError(std::string(err.what()) + " at t = " + std::to_string(t),
                                      err.node_offset());
            }
            if (capped) {
                double a2 = 0.0;
                for (double v : pt.xdd) a2 += v * v;
                const double norm = std::sqrt(a2);
                if (norm > M) {
                    const double factor = 2.0 * opts.penalty_mu * (norm - M) / norm;
                    for (int i = 0; i < n; ++i) d.dxdd[i] += factor * pt.xdd[i];
                }
            }
            const double w = half * rule.weights[q];
            const Basis bw = basis_at((t - t0) / h, h);
            for (int i = 0; i < n; ++i) {
                const double cx = w * d.dx[i];
                const double cxd = w * d.dxd[i];
                const double cxdd = w * d.dxdd[i];
                gx[(std::size_t)k * n + i] += cx * bw.x[0] + cxd * bw.xd[0] + cxdd * bw.xdd[0];
                gs[(std::size_t)k * n + i] += cx * bw.x[1] + cxd * bw.xd[1] + cxdd * bw.xdd[1];
                gx[(std::size_t)(k + 1) * n + i] +=
                    cx * bw.x[2] + cxd * bw.xd[2] + cxdd * bw.xdd[2];
                gs[(std::size_t)(k + 1) * n + i] +=
                    cx * bw.x[3] + cxd * bw.xd[3] + cxdd * bw.xdd[3];
            }
        }
    }
    std::vector<double> out;
    out.reserve(dof_count(traj));
    for (int k = 1; k < K; ++k) {
        for (int i = 0; i < n; ++i) out.push_back(gx[(std::size_t)k * n + i]);
        for (int i = 0; i < n; ++i) out.push_back(gs[(std::size_t)k * n + i]);
    }
    return out;
}

MinimizeResult minimize(const Problem& p, const Trajectory& init, const SolveOptions& opts) {
    check_admissible(p, init);
    MinimizeResult res;
    res.trajectory = init;
    Trajectory& traj = res.trajectory;

    std::vector<double> x;
    extract_dofs(traj, x);
    const std::size_t dim = x.size();

    double fx = objective(p, traj, opts);
    std::vector<double> g = gradient(p, traj, opts);
    res.grad_norm = sup_norm(g);
    if (dim == 0 || res.grad_norm < opts.grad_tol) {
        res.converged = true;
        res.objective = fx;
        return res;
    }

    constexpr int kMemory = 10;
    constexpr double kArmijo = 1e-4;
    constexpr double kBacktrack = 0.5;
    constexpr int kMaxBacktracks = 60;

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> direction(dim), x_new(dim), g_new(dim);
    std::vector<double> alpha(kMemory);

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        // two-loop recursion
        direction = g;
        const int mem = static_cast<int>(s_hist.size());
        for (int i = mem - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * dot(s_hist[i], direction);
            for (std::size_t j = 0; j < dim; ++j) direction[j] -= alpha[i] * y_hist[i][j];
        }
        if (mem > 0) {
            const double gamma =
                dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (double& v : direction) v *= gamma;
        }
        for (int i = 0; i < mem; ++i) {
            const double beta = rho_hist[i] * dot(y_hist[i], direction);
            for (std::size_t j = 0; j < dim; ++j)
                direction[j] += (alpha[i] - beta) * s_hist[i][j];
        }
        for (double& v : direction) v = -v;

        double dir_deriv = dot(g, direction);
        if (!(dir_deriv < 0.0)) {  // not a descent direction: fall back; reset memory
            for (std::size_t j = 0; j < dim; ++j) direction[j] = -g[j];
            dir_deriv = -dot(g, g);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Sufficient decrease with a rounding allowance so progress invisible
        // at the floating-point floor of J does not stall the iteration.
        const double fp_slack = 4.0 * 2.220446049250313e-16 * (1.0 + std::abs(fx));
        auto line_search = [&](double& f_out) {
            double step = 1.0;
            for (int bt = 0; bt < kMaxBacktracks; ++bt) {
                for (std::size_t j = 0; j < dim; ++j) x_new[j] = x[j] + step * direction[j];
                inject_dofs(traj, x_new);
                f_out = objective(p, traj, opts);
                if (std::isfinite(f_out) && f_out <= fx + kArmijo * step * dir_deriv + fp_slack)
                    return true;
                step *= kBacktrack;
            }
            return false;
        };
        double f_new = 0.0;
        bool accepted = line_search(f_new);
        if (!accepted && !s_hist.empty()) {
            // retry once along steepest descent with fresh memory
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t j = 0; j < dim; ++j) direction[j] = -g[j];
            dir_deriv = -dot(g, g);
            accepted = line_search(f_new);
        }
        if (!accepted) {
            inject_dofs(traj, x);  // keep the last good iterate
            res.iterations = iter;
            res.converged = false;
            res.objective = fx;
            res.grad_norm = sup_norm(g);
            return res;
        }

        g_new = gradient(p, traj, opts);
        std::vector<double> s_vec(dim), y_vec(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            s_vec[j] = x_new[j] - x[j];
            y_vec[j] = g_new[j] - g[j];
        }
        const double sy = dot(s_vec, y_vec);
        if (sy > 1e-12 * std::sqrt(dot(s_vec, s_vec)) * std::sqrt(dot(y_vec, y_vec))) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x.swap(x_new);
        g.swap(g_new);
        fx = f_new;
        res.iterations = iter + 1;
        res.grad_norm = sup_norm(g);
        if (res.grad_norm < opts.grad_tol) {
            res.converged = true;
            break;
        }
    }
    inject_dofs(traj, x);
    res.objective = fx;
    return res;
}

SolveReport solve_refined(const Problem& p, const Trajectory& init, const SolveOptions& opts) {
    SolveReport report;
    Trajectory current = init;
    for (int level = 0; level <= opts.refinements; ++level) {
        if (level > 0) current = refine(current);
        MinimizeResult r = minimize(p, current, opts);
        current = r.trajectory;
        report.levels.push_back({current.interval_count(), r.objective, r.grad_norm,
                                 r.iterations, r.converged});
    }
    report.trajectory = std::move(current);
    return report;
}

SolveReport solve_refined(const Problem& p, const SolveOptions& opts) {
    Trajectory init = boundary_cubic_init(p, make_uniform_mesh(p.a, p.b, opts.initial_mesh));
    return solve_refined(p, init, opts);
}

Trajectory boundary_cubic_init(const Problem& p, const std::vector<double>& mesh) {
    // Global Hermite cubic over [a, b] per component, sampled at the knots.
    const double h = p.b - p.a;
    Trajectory out = sample_trajectory(
        mesh, p.n,
        [&](double t) {
            const double u = (t - p.a) / h;
            const double u2 = u * u;
            const double u3 = u2 * u;
            std::vector<double> v(p.n);
            for (int i = 0; i < p.n; ++i)
                v[i] = (2 * u3 - 3 * u2 + 1) * p.bc.x_a[i] + h * (u3 - 2 * u2 + u) * p.bc.xd_a[i] +
                       (-2 * u3 + 3 * u2) * p.bc.x_b[i] + h * (u3 - u2) * p.bc.xd_b[i];
            return v;
        },
        [&](double t) {
            const double u = (t - p.a) / h;
            const double u2 = u * u;
            std::vector<double> v(p.n);
            for (int i = 0; i < p.n; ++i)
                v[i] = ((6 * u2 - 6 * u) / h) * p.bc.x_a[i] + (3 * u2 - 4 * u + 1) * p.bc.xd_a[i] +
                       ((-6 * u2 + 6 * u) / h) * p.bc.x_b[i] + (3 * u2 - 2 * u) * p.bc.xd_b[i];
            return v;
        });
    apply_boundary(out, p);
    return out;
}

Trajectory line_init(const Problem& p, const std::vector<double>& mesh) {
    const double h = p.b - p.a;
    Trajectory out = sample_trajectory(
        mesh, p.n,
        [&](double t) {
            const double u = (t - p.a) / h;
            std::vector<double> v(p.n);
            for (int i = 0; i < p.n; ++i) v[i] = (1 - u) * p.bc.x_a[i] + u * p.bc.x_b[i];
            return v;
        },
        [&](double) {
            std::vector<double> v(p.n);
            for (int i = 0; i < p.n; ++i) v[i] = (p.bc.x_b[i] - p.bc.x_a[i]) / h;
            return v;
        });
    apply_boundary(out, p);
    return out;
}

}  // namespace varcheck
