#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "varcheck/conditions.hpp"
#include "varcheck/solver.hpp"

using namespace varcheck;

namespace {

Problem quadratic_problem() {
    Problem p;
    p.a = 0;
    p.b = 1;
    p.n = 1;
    p.lagrangian = LagrangianExpr::parse("pow(xdd1,2)", 1);
    p.bc = {{0.0}, {1.0}, {0.0}, {0.0}};
    return p;
}

ReparamPoint random_point(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> tp(0.1, 1.0);
    ReparamPoint q;
    q.t = 0.5 + 0.4 * unif(rng);
    q.tprime = tp(rng);
    q.tsecond = 0.5 * unif(rng);
    q.X.resize(n);
    q.Xprime.resize(n);
    q.Xsecond.resize(n);
    for (int i = 0; i < n; ++i) {
        q.X[i] = unif(rng);
        q.Xprime[i] = unif(rng);
        q.Xsecond[i] = unif(rng);
    }
    return q;
}

double eval_F(const LagrangianExpr& L, const ReparamPoint& q) { return F_partials(L, q).F; }

}  // namespace

TEST_CASE("F with trivial chart reduces to L and the stated t' partial") {
    auto L = LagrangianExpr::parse("pow(xdd1,2)+pow(x1,2)+sin(xd1)", 1);
    ReparamPoint q;
    q.t = 0.3;
    q.tprime = 1.0;
    q.tsecond = 0.0;
    q.X = {0.7};
    q.Xprime = {0.4};
    q.Xsecond = {-1.2};
    auto f = F_partials(L, q);
    EvalPoint p{0.3, {0.7}, {0.4}, {-1.2}};
    const double Lval = L.eval(p);
    auto d = L.partials(p);
    CHECK(f.F == doctest::Approx(Lval).epsilon(1e-14));
    CHECK(f.dtprime ==
          doctest::Approx(Lval - d.dxd[0] * 0.4 - 2.0 * d.dxdd[0] * (-1.2)).epsilon(1e-12));
}

TEST_CASE("zero Xprime kills the t'' partial") {
    auto L = LagrangianExpr::parse("pow(xdd1,2)+exp(x1)", 1);
    ReparamPoint q;
    q.t = 0.2;
    q.tprime = 0.6;
    q.tsecond = 0.3;
    q.X = {0.5};
    q.Xprime = {0.0};
    q.Xsecond = {0.8};
    CHECK(F_partials(L, q).dtsecond == 0.0);
}

TEST_CASE("nonpositive tprime is rejected") {
    auto L = LagrangianExpr::parse("pow(xdd1,2)", 1);
    ReparamPoint q;
    q.X = {0.0};
    q.Xprime = {0.0};
    q.Xsecond = {0.0};
    q.tprime = 0.0;
    CHECK_THROWS_AS(F_partials(L, q), std::invalid_argument);
}

TEST_CASE("F partials agree with finite differences at 100 random points") {
    const char* exprs[] = {
        "pow(xdd1,2)",
        "pow(xdd1,2)+pow(x1,2)",
        "t*pow(xdd1,2)+sin(x1)*xd1",
        "pow(abs(pow(x1,2)-pow(xd1,5)),2)*pow(abs(xdd1),22)+0.01*pow(xdd1,2)",
    };
    std::mt19937_64 rng(314);
    int checked = 0;
    for (const char* text : exprs) {
        auto L = LagrangianExpr::parse(text, 1);
        for (int trial = 0; trial < 25; ++trial) {
            ReparamPoint q = random_point(rng, 1);
            auto f = F_partials(L, q);
            auto fd_against = [&](double* slot, double got) {
                const double base = *slot;
                const double fd = oracles::central_diff4(
                    [&](double v) {
                        *slot = v;
                        const double r = eval_F(L, q);
                        *slot = base;
                        return r;
                    },
                    base, 1e-5 * (1.0 + std::abs(base)));
                CHECK(oracles::rel_err(got, fd) < 1e-6);
            };
            fd_against(&q.t, f.dt);
            fd_against(&q.tprime, f.dtprime);
            fd_against(&q.tsecond, f.dtsecond);
            fd_against(&q.X[0], f.dx[0]);
            fd_against(&q.Xprime[0], f.dxprime[0]);
            fd_against(&q.Xsecond[0], f.dxsecond[0]);
            ++checked;
        }
    }
    CHECK(checked == 100);
}

TEST_CASE("autonomous Lagrangians have exactly zero dF/dt") {
    auto L = LagrangianExpr::parse(
        "pow(abs(pow(x1,2)-pow(xd1,5)),2)*pow(abs(xdd1),22)+0.01*pow(xdd1,2)", 1);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        auto f = F_partials(L, random_point(rng, 1));
        CHECK(f.dt == 0.0);
    }
}

TEST_CASE("duBois-Reymond profile is constant on the quadratic minimizer") {
    Problem p = quadratic_problem();
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 64));
    auto chart = arc_length_chart(traj, 8 * 64);
    auto prof = dbr_profile(p, traj, chart, 256);
    CHECK(prof.deviation < 1e-3);
    // the constant is the arc-length energy integral, minus the classical
    // dbr value -36 for this cubic
    CHECK(prof.c_hat == doctest::Approx(36.0).epsilon(1e-6));
    CHECK(!prof.singular_endpoint);

    // strictly decreasing deviation under grid doubling (20% noise allowance
    // for the monotone sequence, strict for 256 -> 512)
    double prev = 1e100;
    for (int grid : {64, 128, 256, 512}) {
        auto pr = dbr_profile(p, traj, chart, grid);
        CHECK(pr.deviation <= prev * 1.2);
        prev = pr.deviation;
    }
    auto p256 = dbr_profile(p, traj, chart, 256);
    auto p512 = dbr_profile(p, traj, chart, 512);
    CHECK(p512.deviation < p256.deviation);
}

TEST_CASE("c_hat is stable across grids >= 128") {
    Problem p = quadratic_problem();
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 64));
    auto chart = arc_length_chart(traj, 8 * 64);
    const double base = dbr_profile(p, traj, chart, 128).c_hat;
    for (int grid : {192, 256, 384, 512}) {
        const double c = dbr_profile(p, traj, chart, grid).c_hat;
        CHECK(std::abs(c - base) < 1e-3 * (1.0 + std::abs(base)));
    }
}

TEST_CASE("perturbed trajectory has a much larger dbr deviation") {
    Problem p = quadratic_problem();
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 64));
    auto chart = arc_length_chart(traj, 8 * 64);
    const double base = dbr_profile(p, traj, chart, 256).deviation;

    Trajectory bad = traj;
    bad.slopes[32] += 0.2;
    auto bad_chart = arc_length_chart(bad, 8 * 64);
    const double perturbed = dbr_profile(p, bad, bad_chart, 256).deviation;
    CHECK(perturbed > 10.0 * base);
}

TEST_CASE("Euler-Lagrange profile on the quadratic minimizer") {
    Problem p = quadratic_problem();
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 64));
    auto chart = arc_length_chart(traj, 8 * 64);
    auto prof = el_profile(p, traj, chart, 1, 256);
    CHECK(prof.deviation < 1e-3);
    // the constant equals 2 x''' = -24 for the cubic
    CHECK(prof.c_hat == doctest::Approx(-24.0).epsilon(1e-6));

    double prev = 1e100;
    for (int grid : {64, 128, 256, 512}) {
        auto pr = el_profile(p, traj, chart, 1, grid);
        CHECK(pr.deviation <= prev * 1.2);
        prev = pr.deviation;
    }

    Trajectory bad = traj;
    bad.slopes[20] += 0.2;
    auto bad_chart = arc_length_chart(bad, 8 * 64);
    CHECK(el_profile(p, bad, bad_chart, 1, 256).deviation > 10.0 * prof.deviation);
}

TEST_CASE("el profile of a dof-independent Lagrangian is identically zero") {
    Problem p = quadratic_problem();
    p.lagrangian = LagrangianExpr::parse("1", 1);
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 16));
    auto chart = arc_length_chart(traj, 8 * 16);
    auto prof = el_profile(p, traj, chart, 1, 64);
    for (double v : prof.values) CHECK(v == 0.0);
    CHECK(prof.deviation == 0.0);
}

TEST_CASE("el profile rejects out-of-range components") {
    Problem p = quadratic_problem();
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 8));
    auto chart = arc_length_chart(traj, 64);
    CHECK_THROWS_AS(el_profile(p, traj, chart, 0, 64), std::out_of_range);
    CHECK_THROWS_AS(el_profile(p, traj, chart, 2, 64), std::out_of_range);
}

TEST_CASE("profile grid size precondition") {
    Problem p = quadratic_problem();
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 8));
    auto chart = arc_length_chart(traj, 64);
    CHECK_THROWS_AS(dbr_profile(p, traj, chart, 8), std::invalid_argument);
}

TEST_CASE("classical residuals on the cubic: dbr constant -36, el zero") {
    Problem p = quadratic_problem();
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 64));
    auto res = classical_residuals(p, traj, 256);
    REQUIRE(!res.dbr_values.empty());
    for (double v : res.dbr_values) CHECK(std::abs(v - (-36.0)) < 1e-3);
    for (double v : res.el_residual) CHECK(std::abs(v) < 1e-4);
}

TEST_CASE("classical el residual of the singular candidate scales like t^(-7/3)") {
    // under L = eps*xdd^2 alone the residual is 2*eps*x'''' which is
    // proportional to t^(-7/3)
    const double kK = std::pow(0.6, 5.0 / 3.0);
    Problem p;
    p.a = 0;
    p.b = 1;
    p.n = 1;
    p.lagrangian = LagrangianExpr::parse("0.01*pow(xdd1,2)", 1);
    p.bc = {{0.0}, {kK}, {0.0}, {5.0 * kK / 3.0}};
    auto traj = sample_trajectory(
        make_graded_mesh(0.0, 1.0, 20, 4), 1,
        [&](double t) { return std::vector<double>{kK * std::pow(t, 5.0 / 3.0)}; },
        [&](double t) {
            return std::vector<double>{t == 0.0 ? 0.0 : 5.0 * kK / 3.0 * std::pow(t, 2.0 / 3.0)};
        });
    auto res = classical_residuals(p, traj, 400);
    // pick two interior samples in smooth territory and compare the scaling
    double t1 = 0.0, r1 = 0.0, t2 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < res.t_samples.size(); ++i) {
        if (t1 == 0.0 && res.t_samples[i] > 0.05) {
            t1 = res.t_samples[i];
            r1 = res.el_residual[i];
        }
        if (res.t_samples[i] > 0.5) {
            t2 = res.t_samples[i];
            r2 = res.el_residual[i];
            break;
        }
    }
    REQUIRE(t1 > 0.0);
    REQUIRE(t2 > t1);
    CHECK(r1 != 0.0);
    const double expected_ratio = std::pow(t1 / t2, -7.0 / 3.0);
    CHECK(r1 / r2 == doctest::Approx(expected_ratio).epsilon(0.15));
}

TEST_CASE("singular endpoint flag trips on the graded singular seed") {
    const double kK = std::pow(0.6, 5.0 / 3.0);
    Problem p;
    p.a = 0;
    p.b = 1;
    p.n = 1;
    p.lagrangian = LagrangianExpr::parse("0.01*pow(xdd1,2)", 1);
    p.bc = {{0.0}, {kK}, {0.0}, {5.0 * kK / 3.0}};
    auto traj = sample_trajectory(
        make_graded_mesh(0.0, 1.0, 39, 1), 1,
        [&](double t) { return std::vector<double>{kK * std::pow(t, 5.0 / 3.0)}; },
        [&](double t) {
            return std::vector<double>{t == 0.0 ? 0.0 : 5.0 * kK / 3.0 * std::pow(t, 2.0 / 3.0)};
        });
    auto chart = arc_length_chart(traj, 512);
    auto prof = el_profile(p, traj, chart, 1, 128);
    CHECK(prof.singular_endpoint);
}

TEST_CASE("vector problem (n = 2): per-component profiles are constant") {
    Problem p;
    p.a = 0;
    p.b = 1;
    p.n = 2;
    p.lagrangian = LagrangianExpr::parse("pow(xdd1,2)+pow(xdd2,2)", 2);
    p.bc = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}};
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 48));
    auto chart = arc_length_chart(traj, 8 * 48);
    for (int i = 1; i <= 2; ++i) {
        auto prof = el_profile(p, traj, chart, i, 256);
        CHECK(prof.deviation < 5e-3);
    }
    auto dbr = dbr_profile(p, traj, chart, 256);
    CHECK(dbr.deviation < 5e-3);
}

TEST_CASE("F partials in the vector case agree with finite differences") {
    auto L = LagrangianExpr::parse("pow(xdd1,2)+pow(xdd2,2)+sin(x1)*xd2", 2);
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 10; ++trial) {
        ReparamPoint q = random_point(rng, 2);
        auto f = F_partials(L, q);
        for (int i = 0; i < 2; ++i) {
            for (auto [slot, got] : {std::pair{&q.Xprime[i], f.dxprime[i]},
                                     std::pair{&q.Xsecond[i], f.dxsecond[i]},
                                     std::pair{&q.X[i], f.dx[i]}}) {
                const double base = *slot;
                const double fd = oracles::central_diff4(
                    [&](double v) {
                        *slot = v;
                        const double r = F_partials(L, q).F;
                        *slot = base;
                        return r;
                    },
                    base, 1e-5 * (1.0 + std::abs(base)));
                CHECK(oracles::rel_err(got, fd) < 1e-6);
            }
        }
    }
}

TEST_CASE("profile csv has the metadata line and schema") {
    Problem p = quadratic_problem();
    auto traj = boundary_cubic_init(p, make_uniform_mesh(0, 1, 16));
    auto chart = arc_length_chart(traj, 128);
    auto prof = dbr_profile(p, traj, chart, 64);
    const std::string csv = profile_csv_string(prof);
    CHECK(csv.rfind("# c_hat=", 0) == 0);
    CHECK(csv.find(" deviation=") != std::string::npos);
    CHECK(csv.find("s,phi\n") != std::string::npos);
    // row count: metadata + header + grid points
    const std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
    CHECK(rows == 2 + prof.s_grid.size());
}
