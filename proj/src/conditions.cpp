#include "varcheck/conditions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace varcheck {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    if (m == 0) return 0.0;
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

// 4th-order first derivative of a uniformly sampled sequence; one-sided
// stencils at the two points nearest each end.
std::vector<double> stencil_derivative(const std::vector<double>& a, double h) {
    const std::size_t m = a.size();
    std::vector<double> d(m, 0.0);
    if (m < 5) {
        for (std::size_t j = 0; j + 1 < m; ++j) d[j] = (a[j + 1] - a[j]) / h;
        if (m >= 2) d[m - 1] = d[m - 2];
        return d;
    }
    const double inv12h = 1.0 / (12.0 * h);
    d[0] = (-25 * a[0] + 48 * a[1] - 36 * a[2] + 16 * a[3] - 3 * a[4]) * inv12h;
    d[1] = (-3 * a[0] - 10 * a[1] + 18 * a[2] - 6 * a[3] + a[4]) * inv12h;
    for (std::size_t j = 2; j + 2 < m; ++j)
        d[j] = (a[j - 2] - 8 * a[j - 1] + 8 * a[j + 1] - a[j + 2]) * inv12h;
    d[m - 2] = (3 * a[m - 1] + 10 * a[m - 2] - 18 * a[m - 3] + 6 * a[m - 4] - a[m - 5]) * inv12h;
    d[m - 1] = (25 * a[m - 1] - 48 * a[m - 2] + 36 * a[m - 3] - 16 * a[m - 4] + 3 * a[m - 5]) *
               inv12h;
    return d;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double h) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t j = 1; j < f.size(); ++j)
        out[j] = out[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
    return out;
}

struct ProfileSeries {
    std::vector<double> head;      // the term differentiated in s
    std::vector<double> mid;       // the term entering with a minus sign
    std::vector<double> tail;      // the term integrated from 0
};

ConditionProfile assemble_profile(const Trajectory& traj, const std::vector<double>& s_grid,
                                  const ProfileSeries& series) {
    const std::size_t G = s_grid.size();
    const double h = s_grid[1] - s_grid[0];
    ConditionProfile out;
    out.s_grid = s_grid;
    out.values.resize(G);
    const std::vector<double> dhead = stencil_derivative(series.head, h);
    const std::vector<double> itail = cumulative_trapezoid(series.tail, h);
    for (std::size_t j = 0; j < G; ++j)
        out.values[j] = dhead[j] - series.mid[j] + itail[j];

    // Endpoint stencils are one-sided, so metrics are taken over the grid
    // trimmed by one cell at each end.
    std::vector<double> trimmed(out.values.begin() + 1, out.values.end() - 1);
    out.c_hat = median_of(trimmed);
    double lo = trimmed[0], hi = trimmed[0];
    for (double v : trimmed) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    out.deviation = (hi - lo) / (1.0 + std::abs(out.c_hat));

    // Flag meshes whose second derivative blows up at a boundary knot
    // relative to the bulk (singular seeds such as k*t^(5/3)).
    std::vector<double> knot_mag;
    std::vector<double> x(traj.n), xd(traj.n), xdd(traj.n);
    for (int k = 0; k < traj.knot_count(); ++k) {
        traj.evaluate(traj.mesh[k], x, xd, xdd);
        knot_mag.push_back(std::sqrt(dot(xdd, xdd)));
    }
    const double bulk = median_of(knot_mag);
    out.singular_endpoint =
        knot_mag.front() > 50.0 * (1.0 + bulk) || knot_mag.back() > 50.0 * (1.0 + bulk);
    return out;
}

struct ThetaSampler {
    const Trajectory& traj;
    const ArcLengthChart& chart;
    ArcLength arc;

    explicit ThetaSampler(const Trajectory& t, const ArcLengthChart& c)
        : traj(t), chart(c), arc(t) {}

    ReparamPoint at(double s) const {
        // The chart's tabulated inverse seeds a Newton polish against the
        // quadrature-exact arc length, so profile samples carry no
        // interpolation error.
        const double t = arc.time_at(s, chart.invert(s));
        const int n = traj.n;
        std::vector<double> x(n), xd(n), xdd(n);
        traj.evaluate(t, x, xd, xdd);
        const double g = 1.0 + dot(xd, xd);
        ReparamPoint q;
        q.t = t;
        q.X = x;
        q.tprime = 1.0 / std::sqrt(g);
        q.tsecond = -dot(xd, xdd) / (g * g);
        q.Xprime.resize(n);
        q.Xsecond.resize(n);
        for (int i = 0; i < n; ++i) {
            q.Xprime[i] = xd[i] * q.tprime;
            q.Xsecond[i] = xdd[i] * q.tprime * q.tprime + xd[i] * q.tsecond;
        }
        return q;
    }
};

std::vector<double> uniform_grid(double length, int grid_size) {
    std::vector<double> s(grid_size);
    for (int j = 0; j < grid_size; ++j) s[j] = length * j / (grid_size - 1);
    return s;
}

void check_profile_inputs(const Trajectory& traj, const ArcLengthChart& chart, int grid_size) {
    if (grid_size < 16) throw std::invalid_argument("profile grid_size must be >= 16");
    if (chart.grid_t.empty() || chart.grid_t.front() != traj.mesh.front() ||
        chart.grid_t.back() != traj.mesh.back())
        throw std::invalid_argument("chart does not match trajectory");
}

}  // namespace

FPartials F_partials(const LagrangianExpr& L, const ReparamPoint& q) {
    if (!(q.tprime > 0.0)) throw std::invalid_argument("ReparamPoint requires tprime > 0");
    const int n = L.dimension();
    const double tp = q.tprime;
    const double tpp = q.tsecond;

    EvalPoint mapped;
    mapped.t = q.t;
    mapped.x = q.X;
    mapped.xd.resize(n);
    mapped.xdd.resize(n);
    for (int i = 0; i < n; ++i) {
        mapped.xd[i] = q.Xprime[i] / tp;
        mapped.xdd[i] = (q.Xsecond[i] - mapped.xd[i] * tpp) / (tp * tp);
    }

    const double Lval = L.eval(mapped);
    const Partials d = L.partials(mapped);

    FPartials out;
    out.F = Lval * tp;
    out.dt = d.dt * tp;
    double acc_xd = 0.0, acc_xdd = 0.0, acc_sec = 0.0;
    for (int i = 0; i < n; ++i) {
        acc_xd += d.dxd[i] * q.Xprime[i];
        acc_xdd += d.dxdd[i] * (-2.0 * q.Xsecond[i] + 3.0 * tpp * q.Xprime[i] / tp);
        acc_sec += d.dxdd[i] * q.Xprime[i];
    }
    out.dtprime = Lval - acc_xd / tp + acc_xdd / (tp * tp);
    out.dtsecond = -acc_sec / (tp * tp);
    out.dx.resize(n);
    out.dxprime.resize(n);
    out.dxsecond.resize(n);
    for (int i = 0; i < n; ++i) {
        out.dx[i] = d.dx[i] * tp;
        out.dxprime[i] = d.dxd[i] - d.dxdd[i] * tpp / (tp * tp);
        out.dxsecond[i] = d.dxdd[i] / tp;
    }
    return out;
}

ConditionProfile dbr_profile(const Problem& p, const Trajectory& traj,
                             const ArcLengthChart& chart, int grid_size) {
    check_profile_inputs(traj, chart, grid_size);
    ThetaSampler sampler(traj, chart);
    const std::vector<double> s_grid = uniform_grid(chart.length, grid_size);
    ProfileSeries series;
    series.head.resize(grid_size);
    series.mid.resize(grid_size);
    series.tail.resize(grid_size);
    for (int j = 0; j < grid_size; ++j) {
        const FPartials f = F_partials(p.lagrangian, sampler.at(s_grid[j]));
        series.head[j] = f.dtsecond;
        series.mid[j] = f.dtprime;
        series.tail[j] = f.dt;
    }
    return assemble_profile(traj, s_grid, series);
}

ConditionProfile el_profile(const Problem& p, const Trajectory& traj,
                            const ArcLengthChart& chart, int component, int grid_size) {
    if (component < 1 || component > traj.n)
        throw std::out_of_range("component index out of range");
    check_profile_inputs(traj, chart, grid_size);
    ThetaSampler sampler(traj, chart);
    const std::vector<double> s_grid = uniform_grid(chart.length, grid_size);
    const int i = component - 1;
    ProfileSeries series;
    series.head.resize(grid_size);
    series.mid.resize(grid_size);
    series.tail.resize(grid_size);
    for (int j = 0; j < grid_size; ++j) {
        const FPartials f = F_partials(p.lagrangian, sampler.at(s_grid[j]));
        series.head[j] = f.dxsecond[i];
        series.mid[j] = f.dxprime[i];
        series.tail[j] = f.dx[i];
    }
    return assemble_profile(traj, s_grid, series);
}

ClassicalResiduals classical_residuals(const Problem& p, const Trajectory& traj, int grid_size) {
    const int K = traj.interval_count();
    const int n = traj.n;
    const int per_interval = std::max(1, (grid_size + K - 1) / K);

    ClassicalResiduals out;
    for (int k = 0; k < K; ++k) {
        const double t0 = traj.mesh[k];
        const double width = traj.mesh[k + 1] - t0;
        for (int j = 0; j < per_interval; ++j) {
            // knot-spanning stencil: the step equals the local interval width
            // so the differences see the sampled curve, not just the local
            // cubic piece (whose own fourth derivative is identically zero)
            const double t = t0 + width * (j + 0.6180339887498949) / per_interval;
            const double h =
                std::min({width, 0.99 * (t - traj.mesh.front()), 0.99 * (traj.mesh.back() - t)});
            out.t_samples.push_back(t);
            const EvalPoint pc = traj.at(t);
            const EvalPoint pm = traj.at(t - h);
            const EvalPoint pp = traj.at(t + h);
            const double L = p.lagrangian.eval(pc);
            const Partials dc = p.lagrangian.partials(pc);
            const Partials dm = p.lagrangian.partials(pm);
            const Partials dp = p.lagrangian.partials(pp);
            double dbr = L;
            for (int i = 0; i < n; ++i) {
                const double d_dxd = (dp.dxd[i] - dm.dxd[i]) / (2.0 * h);
                const double d_dxdd = (dp.dxdd[i] - dm.dxdd[i]) / (2.0 * h);
                const double dd_dxdd = (dp.dxdd[i] - 2.0 * dc.dxdd[i] + dm.dxdd[i]) / (h * h);
                out.el_residual.push_back(dc.dx[i] - d_dxd + dd_dxdd);
                dbr += -pc.xd[i] * dc.dxd[i] - pc.xdd[i] * dc.dxdd[i] + pc.xd[i] * d_dxdd;
            }
            out.dbr_values.push_back(dbr);
        }
    }
    return out;
}

std::string profile_csv_string(const ConditionProfile& profile) {
    std::array<char, 128> buf{};
    std::snprintf(buf.data(), buf.size(), "# c_hat=%.17g deviation=%.17g\n", profile.c_hat,
                  profile.deviation);
    std::string out = buf.data();
    out += "s,phi\n";
    for (std::size_t j = 0; j < profile.s_grid.size(); ++j) {
        std::snprintf(buf.data(), buf.size(), "%.17g,%.17g\n", profile.s_grid[j],
                      profile.values[j]);
        out += buf.data();
    }
    return out;
}

}  // namespace varcheck
