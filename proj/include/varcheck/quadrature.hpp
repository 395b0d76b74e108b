#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace varcheck {

/// Gauss-Legendre nodes/weights on [-1, 1]. Supported orders: 3, 5, 7.
struct GaussRule {
    std::span<const double> nodes;
    std::span<const double> weights;
};

GaussRule gauss_rule(int order);

/// Deterministic pairwise summation; result independent of chunking by callers.
double pairwise_sum(std::span<const double> values);

/// Integrate f over [a, b] with a single Gauss-Legendre panel of given order.
template <typename F>
double gauss_panel(F&& f, double a, double b, int order) {
    GaussRule rule = gauss_rule(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

}  // namespace varcheck
