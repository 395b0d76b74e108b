#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "varcheck/quadrature.hpp"
#include "varcheck/solver.hpp"
#include "varcheck/trajectory.hpp"

using namespace varcheck;

namespace {

// x = 3t^2 - 2t^3 sampled exactly (values and slopes), any mesh of [0,1]
Trajectory cubic_trajectory(int intervals) {
    return sample_trajectory(
        make_uniform_mesh(0.0, 1.0, intervals), 1,
        [](double t) { return std::vector<double>{3 * t * t - 2 * t * t * t}; },
        [](double t) { return std::vector<double>{6 * t - 6 * t * t}; });
}

Trajectory constant_trajectory(double c, int intervals) {
    return sample_trajectory(
        make_uniform_mesh(0.0, 1.0, intervals), 1,
        [c](double) { return std::vector<double>{c}; },
        [](double) { return std::vector<double>{0.0}; });
}

const double kK = std::pow(0.6, 5.0 / 3.0);

Trajectory xtilde_trajectory(int bands, int subdiv) {
    return sample_trajectory(
        make_graded_mesh(0.0, 1.0, bands, subdiv), 1,
        [](double t) { return std::vector<double>{kK * std::pow(t, 5.0 / 3.0)}; },
        [](double t) {
            return std::vector<double>{t == 0.0 ? 0.0 : 5.0 * kK / 3.0 * std::pow(t, 2.0 / 3.0)};
        });
}

}  // namespace

TEST_CASE("gauss rules integrate monomials exactly up to degree 2m-1") {
    for (int order : {3, 5, 7}) {
        GaussRule rule = gauss_rule(order);
        for (int deg = 0; deg <= 2 * order - 1; ++deg) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                acc += rule.weights[i] * std::pow(rule.nodes[i], deg);
            const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
            CHECK(std::abs(acc - exact) < 1e-14);
        }
    }
}

TEST_CASE("cubic is exactly representable") {
    auto traj = cubic_trajectory(7);
    auto p = traj.at(0.5);
    CHECK(p.x[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p.xd[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(p.xdd[0] == doctest::Approx(0.0).epsilon(1e-12));
    // dense agreement with the polynomial
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        auto q = traj.at(t);
        CHECK(q.x[0] == doctest::Approx(3 * t * t - 2 * t * t * t).epsilon(1e-13));
        CHECK(q.xd[0] == doctest::Approx(6 * t - 6 * t * t).epsilon(1e-12));
        CHECK(q.xdd[0] == doctest::Approx(6 - 12 * t).epsilon(1e-10));
    }
}

TEST_CASE("constant trajectory evaluates to (c, 0, 0)") {
    auto traj = constant_trajectory(2.5, 4);
    for (double t : {0.0, 0.31, 0.77, 1.0}) {
        auto p = traj.at(t);
        CHECK(p.x[0] == doctest::Approx(2.5).epsilon(1e-15));
        CHECK(p.xd[0] == doctest::Approx(0.0));
        CHECK(p.xdd[0] == doctest::Approx(0.0));
    }
}

TEST_CASE("boundary evaluation returns bc rows for admissible trajectories") {
    Problem p;
    p.a = 0;
    p.b = 1;
    p.n = 1;
    p.lagrangian = LagrangianExpr::parse("pow(xdd1,2)", 1);
    p.bc = {{0.0}, {1.0}, {0.0}, {0.0}};
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 8));
    CHECK(boundary_matches(traj, p));
    auto end = traj.at(1.0);
    CHECK(end.x[0] == 1.0);
    CHECK(end.xd[0] == 0.0);
}

TEST_CASE("evaluate outside the interval throws") {
    auto traj = cubic_trajectory(4);
    CHECK_THROWS_AS(traj.at(-0.01), std::out_of_range);
    CHECK_THROWS_AS(traj.at(1.01), std::out_of_range);
}

TEST_CASE("sobolev norms of the cubic") {
    auto norms = sobolev_norms(cubic_trajectory(6));
    CHECK(norms.norm2_xdd * norms.norm2_xdd == doctest::Approx(12.0).epsilon(1e-13));
    CHECK(norms.ess_sup_xdd == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("sobolev norms of zero") {
    auto norms = sobolev_norms(constant_trajectory(0.0, 5));
    CHECK(norms.norm2_x == 0.0);
    CHECK(norms.norm2_xd == 0.0);
    CHECK(norms.norm2_xdd == 0.0);
    CHECK(norms.ess_sup_xdd == 0.0);
}

TEST_CASE("sampled singular candidate: finite L2 second derivative, unbounded sup") {
    const double target = 100.0 * kK * kK / 27.0;
    double prev_err = 1e9;
    for (int subdiv : {1, 2, 4}) {
        auto traj = xtilde_trajectory(39, subdiv);
        auto norms = sobolev_norms(traj);
        const double err = std::abs(norms.norm2_xdd * norms.norm2_xdd - target) / target;
        CHECK(err < 0.02);
        CHECK(err <= prev_err * 1.2);
        prev_err = err;
    }
    // ess-sup grows without bound as the mesh grades deeper
    double prev = 0.0;
    for (int bands : {10, 20, 39}) {
        auto norms = sobolev_norms(xtilde_trajectory(bands, 1));
        CHECK(norms.ess_sup_xdd > prev);
        prev = norms.ess_sup_xdd;
    }
    CHECK(prev > 1e3);
}

TEST_CASE("refinement nests exactly") {
    auto traj = cubic_trajectory(2);
    auto fine = refine(traj);
    CHECK(fine.interval_count() == 4);
    auto finer = refine(fine);
    CHECK(finer.interval_count() == 8);
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        auto a = traj.at(t);
        auto b = fine.at(t);
        CHECK(a.x[0] == doctest::Approx(b.x[0]).epsilon(1e-15));
        CHECK(a.xd[0] == doctest::Approx(b.xd[0]).epsilon(1e-14));
    }
    auto n0 = sobolev_norms(traj);
    auto n1 = sobolev_norms(finer);
    CHECK(n0.norm2_xdd == doctest::Approx(n1.norm2_xdd).epsilon(1e-12));
    CHECK(n0.norm2_x == doctest::Approx(n1.norm2_x).epsilon(1e-12));
    CHECK(n0.norm2_xd == doctest::Approx(n1.norm2_xd).epsilon(1e-12));
}

TEST_CASE("chart of the straight line x = t") {
    auto traj = sample_trajectory(
        make_uniform_mesh(0, 1, 4), 1, [](double t) { return std::vector<double>{t}; },
        [](double) { return std::vector<double>{1.0}; });
    auto chart = arc_length_chart(traj, 33);
    CHECK(chart.length == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    for (double tp : chart.tprime_of_s) CHECK(tp == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    for (double ts : chart.tsecond_of_s) CHECK(ts == doctest::Approx(0.0));
}

TEST_CASE("chart of the constant trajectory is the identity") {
    auto traj = constant_trajectory(0.0, 4);
    auto chart = arc_length_chart(traj, 17);
    CHECK(chart.length == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t j = 0; j < chart.s_uniform.size(); ++j) {
        CHECK(chart.t_of_s[j] == doctest::Approx(chart.s_uniform[j]).epsilon(1e-12));
        CHECK(chart.tprime_of_s[j] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(chart.tsecond_of_s[j] == doctest::Approx(0.0));
    }
}

TEST_CASE("cubic arc length against an adaptive Simpson oracle") {
    auto traj = cubic_trajectory(16);
    auto chart = arc_length_chart(traj, 129);
    const double oracle = oracles::adaptive_simpson(
        [](double t) {
            const double xd = 6 * t - 6 * t * t;
            return std::sqrt(1.0 + xd * xd);
        },
        0.0, 1.0, 1e-12);
    CHECK(std::abs(chart.length - oracle) < 1e-8);
}

TEST_CASE("chart invariants: monotone s, t' in (0,1], compose to identity") {
    auto traj = cubic_trajectory(8);
    auto chart = arc_length_chart(traj, 65);
    for (std::size_t i = 0; i + 1 < chart.grid_s.size(); ++i)
        CHECK(chart.grid_s[i] < chart.grid_s[i + 1]);
    for (double tp : chart.tprime_of_s) {
        CHECK(tp > 0.0);
        CHECK(tp <= 1.0 + 1e-15);
    }
    for (std::size_t i = 0; i < chart.grid_t.size(); ++i) {
        const double back = chart.invert(chart.grid_s[i]);
        CHECK(std::abs(back - chart.grid_t[i]) < 1e-6);
    }
}

TEST_CASE("chain-rule consistency: X'(s) = xd(t(s)) * t'(s)") {
    auto traj = cubic_trajectory(8);
    auto chart = arc_length_chart(traj, 129);
    // compare the tabulated X' with a finite difference of X(s) = x(t(s))
    ArcLength arc(traj);
    for (int j = 10; j < 120; j += 13) {
        const double s = chart.s_uniform[j];
        const double h = 1e-6;
        auto xval = [&](double ss) {
            const double t = arc.time_at(ss, chart.invert(ss));
            return traj.at(t).x[0];
        };
        const double fd = (xval(s + h) - xval(s - h)) / (2 * h);
        const double t = chart.t_of_s[j];
        const double analytic = traj.at(t).xd[0] * chart.tprime_of_s[j];
        CHECK(std::abs(fd - analytic) < 1e-6 * (1.0 + std::abs(traj.at(t).xd[0])));
    }
}

TEST_CASE("trajectory csv round-trip") {
    auto traj = cubic_trajectory(5);
    const std::string path = "test_traj_roundtrip.csv";
    save_trajectory_csv(traj, path);
    auto loaded = load_trajectory_csv(path);
    REQUIRE(loaded.mesh.size() == traj.mesh.size());
    for (std::size_t i = 0; i < traj.mesh.size(); ++i) {
        CHECK(loaded.mesh[i] == traj.mesh[i]);
        CHECK(loaded.values[i] == traj.values[i]);
        CHECK(loaded.slopes[i] == traj.slopes[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("graded mesh geometry") {
    auto mesh = make_graded_mesh(0.0, 1.0, 5, 1);
    REQUIRE(mesh.size() == 6);
    CHECK(mesh.front() == 0.0);
    CHECK(mesh.back() == 1.0);
    // widths double away from the singular end
    for (std::size_t i = 2; i < mesh.size(); ++i) {
        const double w_prev = mesh[i - 1] - mesh[i - 2];
        const double w = mesh[i] - mesh[i - 1];
        CHECK(w == doctest::Approx(2.0 * w_prev).epsilon(1e-12));
    }
}
