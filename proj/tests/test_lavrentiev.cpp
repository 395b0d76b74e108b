#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "varcheck/lavrentiev.hpp"

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

const double kK = std::pow(0.6, 5.0 / 3.0);

Problem cv90_problem() {
    Problem p;
    p.a = 0;
    p.b = 1;
    p.n = 1;
    p.lagrangian = LagrangianExpr::parse(
        "pow(abs(pow(x1,2)-pow(xd1,5)),2)*pow(abs(xdd1),22)+0.01*pow(xdd1,2)", 1);
    p.bc = {{0.0}, {kK}, {0.0}, {5.0 * kK / 3.0}};
    return p;
}

Trajectory xtilde_seed(int bands, int subdiv) {
    return sample_trajectory(
        make_graded_mesh(0.0, 1.0, bands, subdiv), 1,
        [](double t) { return std::vector<double>{kK * std::pow(t, 5.0 / 3.0)}; },
        [](double t) {
            return std::vector<double>{t == 0.0 ? 0.0 : 5.0 * kK / 3.0 * std::pow(t, 2.0 / 3.0)};
        });
}

}  // namespace

TEST_CASE("non-binding cap leaves no gap") {
    Problem p = quadratic_problem();
    SolveOptions opts;
    opts.initial_mesh = 8;
    opts.refinements = 2;
    opts.penalty_mu = 1e3;
    auto report = probe_gap(p, opts, 20.0);
    REQUIRE(report.levels.size() == 3);
    CHECK(std::abs(report.gap_estimate) < 1e-6);
    for (const auto& l : report.levels) {
        CHECK(l.J_capped >= l.J_unconstrained - 1e-10);
        CHECK(l.J_unconstrained == doctest::Approx(12.0).epsilon(1e-9));
        CHECK(l.max_abs_xdd_unconstrained == doctest::Approx(6.0).epsilon(1e-6));
    }
    CHECK(report.all_converged());
}

TEST_CASE("penalty_mu = 0 sentinel: both legs identical, gap exactly zero") {
    Problem p = quadratic_problem();
    SolveOptions opts;
    opts.initial_mesh = 8;
    opts.refinements = 1;
    opts.penalty_mu = 0.0;
    auto report = probe_gap(p, opts, 3.0);
    CHECK(report.gap_estimate == 0.0);
    for (const auto& l : report.levels) CHECK(l.J_capped == l.J_unconstrained);
}

TEST_CASE("binding cap matches the control-space dual oracle") {
    Problem p = quadratic_problem();
    SolveOptions opts;
    opts.initial_mesh = 8;
    opts.refinements = 3;
    opts.penalty_mu = 1e3;
    opts.grad_tol = 1e-8;
    opts.max_iters = 4000;
    auto report = probe_gap(p, opts, 3.0);
    const auto& last = report.levels.back();
    // the stiff penalty stalls the line search at the floating-point floor
    // long before the sup-norm tolerance; the value is what matters here

    oracles::CappedQuadraticOracle oracle{3.0, last.penalty_mu};
    const double expected = oracle.value();
    CHECK(expected > 12.0);
    CHECK(last.J_capped > last.J_unconstrained);
    CHECK(std::abs(last.J_capped - expected) < 0.01 * expected);
    // margin over the unconstrained value agrees with the oracle's margin
    CHECK(std::abs((last.J_capped - last.J_unconstrained) - (expected - 12.0)) <
          0.01 * (expected - 12.0));
}

TEST_CASE("cap sweep: J_capped nonincreasing in the cap, strictly from 3 to 6") {
    Problem p = quadratic_problem();
    SolveOptions opts;
    opts.initial_mesh = 8;
    opts.refinements = 2;
    opts.penalty_mu = 1e3;
    opts.grad_tol = 1e-8;
    opts.max_iters = 4000;
    auto reports = cap_sweep(p, opts, {3.0, 6.0, 20.0});
    REQUIRE(reports.size() == 3);
    const double j3 = reports[0].levels.back().J_capped;
    const double j6 = reports[1].levels.back().J_capped;
    const double j20 = reports[2].levels.back().J_capped;
    CHECK(j3 > j6 + 1e-3);             // cap 3 binds
    CHECK(std::abs(j6 - j20) < 1e-6);  // 6 and 20 both non-binding
    CHECK(j6 == doctest::Approx(12.0).epsilon(1e-8));
    for (std::size_t i = 1; i < reports.size(); ++i)
        CHECK(reports[i].levels.back().J_capped <=
              reports[i - 1].levels.back().J_capped + 1e-8);
}

TEST_CASE("cap sweep with a single cap equals probe_gap") {
    Problem p = quadratic_problem();
    SolveOptions opts;
    opts.initial_mesh = 8;
    opts.penalty_mu = 1e3;
    auto sweep = cap_sweep(p, opts, {20.0});
    auto solo = probe_gap(p, opts, 20.0);
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].gap_estimate == solo.gap_estimate);
    CHECK(gap_report_json(sweep[0]) == gap_report_json(solo));
}

TEST_CASE("increasing refinement never increases J_unconstrained") {
    Problem p = cv90_problem();
    SolveOptions opts;
    opts.initial_mesh = 10;
    opts.refinements = 2;
    opts.penalty_mu = 1e3;
    opts.grad_tol = 1e-7;
    opts.max_iters = 4000;
    auto report = probe_gap(p, opts, 10.0);
    for (std::size_t i = 1; i < report.levels.size(); ++i)
        CHECK(report.levels[i].J_unconstrained <=
              report.levels[i - 1].J_unconstrained + 1e-10);
}

TEST_CASE("singular seed is recorded and can only help the unconstrained leg") {
    Problem p = cv90_problem();
    SolveOptions opts;
    opts.initial_mesh = 10;
    opts.refinements = 1;
    opts.penalty_mu = 1e3;
    opts.grad_tol = 1e-7;
    opts.max_iters = 4000;
    auto seed = xtilde_seed(39, 1);
    auto with_seed = probe_gap(p, opts, 10.0, seed);
    REQUIRE(with_seed.singular_seed_value.has_value());
    // closed form: eps * 100 k^2 / 27 for the exact candidate
    const double expected = 0.01 * 100.0 * kK * kK / 27.0;
    CHECK(*with_seed.singular_seed_value == doctest::Approx(expected).epsilon(0.02));

    auto without_seed = probe_gap(p, opts, 10.0);
    for (std::size_t i = 0; i < with_seed.levels.size(); ++i)
        CHECK(with_seed.levels[i].J_unconstrained <=
              without_seed.levels[i].J_unconstrained + 1e-12);
}

TEST_CASE("gap report serializations") {
    Problem p = quadratic_problem();
    SolveOptions opts;
    opts.initial_mesh = 4;
    opts.refinements = 1;
    opts.penalty_mu = 1e3;
    auto report = probe_gap(p, opts, 20.0);
    const std::string csv = gap_report_csv(report);
    CHECK(csv.rfind("level,K,J_unc,J_cap,max_abs_xdd\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + (long)report.levels.size());
    const std::string json = gap_report_json(report);
    for (const char* key : {"\"levels\"", "\"gap_estimate\"", "\"singular_seed_value\"",
                            "\"penalty_mu\"", "\"max_abs_xdd_unconstrained\""})
        CHECK(json.find(key) != std::string::npos);
}
