#pragma once

#include <optional>
#include <string>

#include "varcheck/problem_file.hpp"

namespace varcheck {

/// Process exit codes for the command drivers.
enum ExitCode : int {
    kExitOk = 0,
    kExitParseError = 2,
    kExitNotConverged = 3,
    kExitDomainError = 4,
};

struct RunRequest {
    std::string command;  // solve | check-conditions | check-regularity | probe-lavrentiev
    std::optional<std::string> problem_path;  // mutually exclusive with preset_name
    std::optional<std::string> preset_name;
    std::string out_dir = "varcheck_out";
    std::optional<int> mesh;
    std::optional<int> refinements;
    std::optional<double> grad_tol;
    std::optional<std::uint64_t> rng_seed;
    int grid = 256;  // profile grid size
    std::optional<double> cap;
    std::optional<std::string> trajectory_path;  // input trajectory / singular seed
};

struct RunResult {
    int exit_code = kExitOk;
    std::string message;  // human-readable status or error
};

/// Execute a command and write its artifacts (problem echo, CSVs, JSON
/// reports, summary with content hashes) under request.out_dir.
RunResult run_command(const RunRequest& request);

/// FNV-1a 64-bit content hash, used for the artifact summary.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace varcheck
