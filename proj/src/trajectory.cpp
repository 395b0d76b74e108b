#include "varcheck/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "varcheck/quadrature.hpp"

namespace varcheck {

namespace {

struct HermiteWeights {
    // x(t) = wx[0]*x0 + wx[1]*s0 + wx[2]*x1 + wx[3]*s1, same layout for xd, xdd
    std::array<double, 4> x, xd, xdd;
};

HermiteWeights hermite_weights(double u, double h) {
    const double u2 = u * u;
    const double u3 = u2 * u;
    HermiteWeights w;
    w.x = {2 * u3 - 3 * u2 + 1, h * (u3 - 2 * u2 + u), -2 * u3 + 3 * u2, h * (u3 - u2)};
    w.xd = {(6 * u2 - 6 * u) / h, 3 * u2 - 4 * u + 1, (-6 * u2 + 6 * u) / h, 3 * u2 - 2 * u};
    w.xdd = {(12 * u - 6) / (h * h), (6 * u - 4) / h, (-12 * u + 6) / (h * h), (6 * u - 2) / h};
    return w;
}

double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::string format17(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data());
}

}  // namespace

int Trajectory::locate(double t) const {
    const double a = mesh.front();
    const double b = mesh.back();
    if (!(t >= a && t <= b)) throw std::out_of_range("evaluation time outside [a, b]");
    if (t >= mesh[mesh.size() - 2]) return interval_count() - 1;
    auto it = std::upper_bound(mesh.begin(), mesh.end(), t);
    return static_cast<int>(it - mesh.begin()) - 1;
}

void Trajectory::evaluate(double t, std::span<double> x, std::span<double> xd,
                          std::span<double> xdd) const {
    const int k = locate(t);
    const double t0 = mesh[k];
    const double h = mesh[k + 1] - t0;
    const double u = (t - t0) / h;
    const HermiteWeights w = hermite_weights(u, h);
    auto x0 = value_row(k);
    auto s0 = slope_row(k);
    auto x1 = value_row(k + 1);
    auto s1 = slope_row(k + 1);
    for (int i = 0; i < n; ++i) {
        x[i] = w.x[0] * x0[i] + w.x[1] * s0[i] + w.x[2] * x1[i] + w.x[3] * s1[i];
        xd[i] = w.xd[0] * x0[i] + w.xd[1] * s0[i] + w.xd[2] * x1[i] + w.xd[3] * s1[i];
        xdd[i] = w.xdd[0] * x0[i] + w.xdd[1] * s0[i] + w.xdd[2] * x1[i] + w.xdd[3] * s1[i];
    }
}

EvalPoint Trajectory::at(double t) const {
    EvalPoint p;
    p.t = t;
    p.x.resize(n);
    p.xd.resize(n);
    p.xdd.resize(n);
    evaluate(t, p.x, p.xd, p.xdd);
    return p;
}

SobolevNorms sobolev_norms(const Trajectory& traj) {
    const int K = traj.interval_count();
    const int n = traj.n;
    std::vector<double> cx, cxd, cxdd;
    cx.reserve(K);
    cxd.reserve(K);
    cxdd.reserve(K);
    std::vector<double> x(n), xd(n), xdd(n);
    GaussRule rule = gauss_rule(5);  // exact for the degree-6 integrand |x|^2
    SobolevNorms out;
    for (int k = 0; k < K; ++k) {
        const double t0 = traj.mesh[k];
        const double t1 = traj.mesh[k + 1];
        const double mid = 0.5 * (t0 + t1);
        const double half = 0.5 * (t1 - t0);
        double ax = 0.0, axd = 0.0, axdd = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = mid + half * rule.nodes[q];
            traj.evaluate(t, x, xd, xdd);
            ax += rule.weights[q] * dot(x, x);
            axd += rule.weights[q] * dot(xd, xd);
            axdd += rule.weights[q] * dot(xdd, xdd);
        }
        cx.push_back(ax * half);
        cxd.push_back(axd * half);
        cxdd.push_back(axdd * half);
        // xdd is linear per interval, so |xdd| attains its max at the ends
        traj.evaluate(t0, x, xd, xdd);
        out.ess_sup_xdd = std::max(out.ess_sup_xdd, norm2(xdd));
        const HermiteWeights w = hermite_weights(1.0, t1 - t0);
        auto x0 = traj.value_row(k);
        auto s0 = traj.slope_row(k);
        auto x1 = traj.value_row(k + 1);
        auto s1 = traj.slope_row(k + 1);
        double end_norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double v = w.xdd[0] * x0[i] + w.xdd[1] * s0[i] + w.xdd[2] * x1[i] + w.xdd[3] * s1[i];
            end_norm += v * v;
        }
        out.ess_sup_xdd = std::max(out.ess_sup_xdd, std::sqrt(end_norm));
    }
    out.norm2_x = std::sqrt(pairwise_sum(cx));
    out.norm2_xd = std::sqrt(pairwise_sum(cxd));
    out.norm2_xdd = std::sqrt(pairwise_sum(cxdd));
    return out;
}

Trajectory refine(const Trajectory& traj) {
    const int K = traj.interval_count();
    const int n = traj.n;
    Trajectory out;
    out.n = n;
    out.mesh.reserve(2 * K + 1);
    out.values.reserve((2 * K + 1) * n);
    out.slopes.reserve((2 * K + 1) * n);
    std::vector<double> x(n), xd(n), xdd(n);
    for (int k = 0; k < K; ++k) {
        out.mesh.push_back(traj.mesh[k]);
        auto xr = traj.value_row(k);
        auto sr = traj.slope_row(k);
        out.values.insert(out.values.end(), xr.begin(), xr.end());
        out.slopes.insert(out.slopes.end(), sr.begin(), sr.end());
        const double tm = 0.5 * (traj.mesh[k] + traj.mesh[k + 1]);
        traj.evaluate(tm, x, xd, xdd);
        out.mesh.push_back(tm);
        out.values.insert(out.values.end(), x.begin(), x.end());
        out.slopes.insert(out.slopes.end(), xd.begin(), xd.end());
    }
    out.mesh.push_back(traj.mesh.back());
    auto xr = traj.value_row(K);
    auto sr = traj.slope_row(K);
    out.values.insert(out.values.end(), xr.begin(), xr.end());
    out.slopes.insert(out.slopes.end(), sr.begin(), sr.end());
    return out;
}

ArcLength::ArcLength(const Trajectory& traj) : traj_(traj) {
    const int K = traj.interval_count();
    knot_s_.resize(K + 1);
    knot_s_[0] = 0.0;
    auto speed = [&](double t) { return speed_at(t); };
    for (int k = 0; k < K; ++k) {
        const double t0 = traj.mesh[k];
        const double t1 = traj.mesh[k + 1];
        double acc = 0.0;
        for (int j = 0; j < 8; ++j) {
            const double a = t0 + (t1 - t0) * j / 8.0;
            const double b = t0 + (t1 - t0) * (j + 1) / 8.0;
            acc += gauss_panel(speed, a, b, 7);
        }
        knot_s_[k + 1] = knot_s_[k] + acc;
    }
}

double ArcLength::speed_at(double t) const {
    std::vector<double> x(traj_.n), xd(traj_.n), xdd(traj_.n);
    traj_.evaluate(t, x, xd, xdd);
    return std::sqrt(1.0 + dot(xd, xd));
}

double ArcLength::s_at(double t) const {
    const int k = traj_.locate(t);
    auto speed = [&](double tt) { return speed_at(tt); };
    const double t0 = traj_.mesh[k];
    const double mid = 0.5 * (t0 + t);
    return knot_s_[k] + gauss_panel(speed, t0, mid, 7) + gauss_panel(speed, mid, t, 7);
}

double ArcLength::time_at(double s, double guess) const {
    const double a = traj_.mesh.front();
    const double b = traj_.mesh.back();
    double t = std::clamp(guess, a, b);
    for (int iter = 0; iter < 6; ++iter) {
        const double f = s_at(t) - s;
        const double df = speed_at(t);
        t = std::clamp(t - f / df, a, b);
    }
    return t;
}

double ArcLength::time_at(double s) const {
    auto it = std::lower_bound(knot_s_.begin(), knot_s_.end(), s);
    std::size_t k = it == knot_s_.begin() ? 0 : (it - knot_s_.begin()) - 1;
    k = std::min(k, traj_.mesh.size() - 2);
    const double s0 = knot_s_[k];
    const double s1 = knot_s_[k + 1];
    const double frac = s1 > s0 ? (s - s0) / (s1 - s0) : 0.0;
    const double guess = traj_.mesh[k] + frac * (traj_.mesh[k + 1] - traj_.mesh[k]);
    return time_at(s, guess);
}

namespace {

// Monotone cubic eval for t(s) over tabulated (grid_s, grid_t, slopes).
double monotone_cubic_eval(const std::vector<double>& xs, const std::vector<double>& ys,
                           const std::vector<double>& ms, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = (it - xs.begin()) - 1;
    const double h = xs[k + 1] - xs[k];
    const double u = (x - xs[k]) / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * ys[k] + (u3 - 2 * u2 + u) * h * ms[k] +
           (-2 * u3 + 3 * u2) * ys[k + 1] + (u3 - u2) * h * ms[k + 1];
}

}  // namespace

double ArcLengthChart::invert(double s) const {
    return monotone_cubic_eval(grid_s, grid_t, inverse_slopes, s);
}

ArcLengthChart arc_length_chart(const Trajectory& traj, int samples) {
    if (samples < 2) throw std::invalid_argument("chart samples must be >= 2");
    ArcLengthChart chart;
    ArcLength arc(traj);
    const int K = traj.interval_count();

    chart.grid_t.reserve(8 * K + 1);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < 8; ++j)
            chart.grid_t.push_back(traj.mesh[k] + (traj.mesh[k + 1] - traj.mesh[k]) * j / 8.0);
    chart.grid_t.push_back(traj.mesh.back());
    chart.grid_s.resize(chart.grid_t.size());
    for (std::size_t i = 0; i < chart.grid_t.size(); ++i)
        chart.grid_s[i] = arc.s_at(chart.grid_t[i]);
    chart.grid_s.front() = 0.0;
    chart.length = chart.grid_s.back();

    // Exact inverse slopes dt/ds = 1/s'(t), then the Fritsch-Carlson limiter
    // to keep the tabulated inverse monotone.
    const std::size_t m = chart.grid_t.size();
    chart.inverse_slopes.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        chart.inverse_slopes[i] = 1.0 / arc.speed_at(chart.grid_t[i]);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double delta = (chart.grid_t[i + 1] - chart.grid_t[i]) /
                             (chart.grid_s[i + 1] - chart.grid_s[i]);
        const double alpha = chart.inverse_slopes[i] / delta;
        const double beta = chart.inverse_slopes[i + 1] / delta;
        const double r = alpha * alpha + beta * beta;
        if (r > 9.0) {
            const double scale = 3.0 / std::sqrt(r);
            chart.inverse_slopes[i] *= scale;
            chart.inverse_slopes[i + 1] *= scale;
        }
    }

    chart.s_uniform.resize(samples);
    chart.t_of_s.resize(samples);
    chart.tprime_of_s.resize(samples);
    chart.tsecond_of_s.resize(samples);
    std::vector<double> x(traj.n), xd(traj.n), xdd(traj.n);
    for (int j = 0; j < samples; ++j) {
        const double s = chart.length * j / (samples - 1);
        chart.s_uniform[j] = s;
        const double t = chart.invert(s);
        chart.t_of_s[j] = t;
        traj.evaluate(t, x, xd, xdd);
        const double g = 1.0 + dot(xd, xd);
        chart.tprime_of_s[j] = 1.0 / std::sqrt(g);
        chart.tsecond_of_s[j] = -dot(xd, xdd) / (g * g);
    }
    return chart;
}

std::vector<double> make_uniform_mesh(double a, double b, int intervals) {
    if (intervals < 1) throw std::invalid_argument("mesh needs at least one interval");
    std::vector<double> mesh(intervals + 1);
    for (int k = 0; k <= intervals; ++k) mesh[k] = a + (b - a) * k / intervals;
    mesh.front() = a;
    mesh.back() = b;
    return mesh;
}

std::vector<double> make_graded_mesh(double a, double b, int bands, int subdiv) {
    if (bands < 1 || subdiv < 1) throw std::invalid_argument("bad graded mesh parameters");
    const double w1 = (b - a) / (std::pow(2.0, bands) - 1.0);
    std::vector<double> mesh;
    mesh.reserve(bands * subdiv + 1);
    mesh.push_back(a);
    double left = a;
    double width = w1;
    for (int j = 0; j < bands; ++j) {
        for (int m = 1; m <= subdiv; ++m) mesh.push_back(left + width * m / subdiv);
        left += width;
        width *= 2.0;
    }
    mesh.back() = b;
    return mesh;
}

Trajectory sample_trajectory(std::vector<double> mesh, int n,
                             const std::function<std::vector<double>(double)>& value,
                             const std::function<std::vector<double>(double)>& slope) {
    Trajectory out;
    out.n = n;
    out.mesh = std::move(mesh);
    out.values.reserve(out.mesh.size() * n);
    out.slopes.reserve(out.mesh.size() * n);
    for (double t : out.mesh) {
        auto v = value(t);
        auto s = slope(t);
        out.values.insert(out.values.end(), v.begin(), v.end());
        out.slopes.insert(out.slopes.end(), s.begin(), s.end());
    }
    return out;
}

void apply_boundary(Trajectory& traj, const Problem& p) {
    const int n = traj.n;
    const std::size_t last = (traj.mesh.size() - 1) * n;
    for (int i = 0; i < n; ++i) {
        traj.values[i] = p.bc.x_a[i];
        traj.slopes[i] = p.bc.xd_a[i];
        traj.values[last + i] = p.bc.x_b[i];
        traj.slopes[last + i] = p.bc.xd_b[i];
    }
}

bool boundary_matches(const Trajectory& traj, const Problem& p) {
    const int n = traj.n;
    const std::size_t last = (traj.mesh.size() - 1) * n;
    for (int i = 0; i < n; ++i) {
        if (traj.values[i] != p.bc.x_a[i] || traj.slopes[i] != p.bc.xd_a[i]) return false;
        if (traj.values[last + i] != p.bc.x_b[i] || traj.slopes[last + i] != p.bc.xd_b[i])
            return false;
    }
    return true;
}

std::string trajectory_csv_string(const Trajectory& traj) {
    std::string out = "t";
    for (int i = 1; i <= traj.n; ++i) out += ",x" + std::to_string(i);
    for (int i = 1; i <= traj.n; ++i) out += ",xd" + std::to_string(i);
    out += "\n";
    for (int k = 0; k < traj.knot_count(); ++k) {
        out += format17(traj.mesh[k]);
        for (double v : traj.value_row(k)) out += "," + format17(v);
        for (double v : traj.slope_row(k)) out += "," + format17(v);
        out += "\n";
    }
    return out;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << trajectory_csv_string(traj);
}

Trajectory load_trajectory_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open trajectory file: " + path);
    std::string header;
    if (!std::getline(f, header)) throw std::runtime_error("empty trajectory file: " + path);
    // header "t,x1..xn,xd1..xdn" determines n
    int cols = 1;
    for (char c : header) cols += c == ',';
    if (cols < 3 || (cols - 1) % 2 != 0)
        throw std::runtime_error("malformed trajectory header: " + header);
    const int n = (cols - 1) / 2;
    std::string expected = "t";
    for (int i = 1; i <= n; ++i) expected += ",x" + std::to_string(i);
    for (int i = 1; i <= n; ++i) expected += ",xd" + std::to_string(i);
    if (!header.starts_with(expected))
        throw std::runtime_error("malformed trajectory header: " + header);
    Trajectory out;
    out.n = n;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (static_cast<int>(row.size()) != cols)
            throw std::runtime_error("malformed trajectory row: " + line);
        out.mesh.push_back(row[0]);
        for (int i = 0; i < n; ++i) out.values.push_back(row[1 + i]);
        for (int i = 0; i < n; ++i) out.slopes.push_back(row[1 + n + i]);
    }
    if (out.mesh.size() < 2) throw std::runtime_error("trajectory needs at least two knots");
    for (std::size_t k = 0; k + 1 < out.mesh.size(); ++k)
        if (!(out.mesh[k] < out.mesh[k + 1]))
            throw std::runtime_error("trajectory mesh must be strictly increasing");
    return out;
}

}  // namespace varcheck
