#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varcheck/expr.hpp"

namespace varcheck {

/// Box domain and sampling plan for the condition checkers. Bounds apply to
/// every component of the corresponding variable group.
struct SampleDomain {
    double t_lo = 0.0, t_hi = 1.0;
    double x_lo = -1.0, x_hi = 1.0;
    double xd_lo = -1.0, xd_hi = 1.0;
    double xdd_lo = -2.0, xdd_hi = 2.0;
    int grid = 5;            // points per axis of the tensor grid
    int random_count = 32;   // extra uniform samples
    std::uint64_t rng_seed = 12345;
};

enum class Verdict { HoldsOnSamples, Violated };

std::string verdict_name(Verdict v);

/// Sampled verdict for one condition: fitted constants, or a violation
/// witness at which the defining inequality re-evaluates to margin < 0
/// bit-identically.
struct Certificate {
    std::string kind;
    Verdict verdict = Verdict::HoldsOnSamples;
    std::vector<std::pair<std::string, double>> constants;
    std::optional<EvalPoint> witness;
    std::optional<EvalPoint> witness_b;  // second endpoint of a convexity pair
    double margin = 0.0;                 // minimum slack over samples
    std::size_t sample_count = 0;
    std::size_t skipped_samples = 0;     // samples with evaluation domain errors
    std::uint64_t rng_seed = 0;

    double constant(const std::string& name) const;
};

/// Superlinearity of dL/dxdd (the regularity hypothesis): fits the largest
/// a > 0 with a|w| + b_min <= |dL/dxdd| on every sample. L must be autonomous.
Certificate check_superlinearity(const LagrangianExpr& L, const SampleDomain& dom, double b_min);

/// Stronger quadratic variant: a|w|^2 + b_min <= |dL/dxdd|.
Certificate check_quadratic_coercivity(const LagrangianExpr& L, const SampleDomain& dom,
                                       double b_min);

/// Midpoint convexity of L in the xdd block over sampled pairs.
Certificate check_convexity_last_arg(const LagrangianExpr& L, const SampleDomain& dom);

struct CoercivityTable {
    std::vector<double> radii;
    std::vector<double> theta_hat;  // min of L over the |xdd| = r shell
    bool superlinear = false;       // theta_hat(r)/r strictly increasing at the tail
};

/// Growth table for the coercivity hypothesis: theta_hat(r) by shell sampling.
CoercivityTable check_coercivity(const LagrangianExpr& L, const SampleDomain& dom,
                                 const std::vector<double>& radii);

/// |dL/dx| + |dL/dxd| <= c|L| + r fitted by envelope over samples.
Certificate check_tonelli_morrey(const LagrangianExpr& L, const SampleDomain& dom);

/// |dL/dt| <= c|L| + k; trivially (0, 0) for declared-autonomous L.
Certificate check_autonomy_condition(const LagrangianExpr& L, const SampleDomain& dom);

/// (|dL/dt| + |dL/dx|) |xd|^mu <= gamma L^beta + eta.
Certificate check_sarychev_torres(const LagrangianExpr& L, const SampleDomain& dom, double beta,
                                  double mu);

/// Re-evaluate the certificate's defining inequality at its stored witness;
/// reproduces Certificate::margin bit-identically for violated verdicts.
double recheck_margin(const LagrangianExpr& L, const Certificate& cert);

/// Deterministic sample set: tensor grid, seeded uniform points, and the
/// forced special points (xdd = 0 and axis extremes).
std::vector<EvalPoint> make_samples(const SampleDomain& dom, int n);

std::string certificate_json(const Certificate& cert);
std::string coercivity_json(const CoercivityTable& table);

}  // namespace varcheck
