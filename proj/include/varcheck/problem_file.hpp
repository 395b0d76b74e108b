#pragma once

#include <string>
#include <vector>

#include "varcheck/regularity.hpp"
#include "varcheck/solver.hpp"

namespace varcheck {

class ProblemFileError : public std::runtime_error {
public:
    ProblemFileError(const std::string& what, int line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Parsed problem file: the variational problem plus solver, sampling and
/// prober settings. INI-style sections with exact keys; unknown keys are
/// errors.
struct ProblemFile {
    Problem problem;
    SolveOptions solver;
    SampleDomain domain;
    double b_min = 1e-3;
    std::vector<double> radii = {1.0, 2.0, 4.0, 8.0};
    double st_beta = 1.0;
    double st_mu = 0.0;
    std::vector<double> caps = {3.0, 6.0, 20.0};
    double penalty_mu = 1e3;

    /// Canonical serialization (parse -> canonical_text -> parse is stable).
    std::string canonical_text() const;
};

ProblemFile parse_problem_file(const std::string& text);
ProblemFile load_problem_file(const std::string& path);

/// Named problem files for the shipped examples:
/// quadratic, quadratic-affine, cv90, zero.
std::string preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace varcheck
