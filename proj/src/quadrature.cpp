#include "varcheck/quadrature.hpp"

#include <stdexcept>

namespace varcheck {

namespace {

constexpr double kNodes3[] = {
    -0.77459666924148338, 0.0, 0.77459666924148338};
constexpr double kWeights3[] = {
    0.55555555555555556, 0.88888888888888889, 0.55555555555555556};

constexpr double kNodes5[] = {
    -0.90617984593866399, -0.53846931010568309, 0.0,
    0.53846931010568309, 0.90617984593866399};
constexpr double kWeights5[] = {
    0.23692688505618909, 0.47862867049936647, 0.56888888888888889,
    0.47862867049936647, 0.23692688505618909};

constexpr double kNodes7[] = {
    -0.94910791234275852, -0.74153118559939444, -0.40584515137739717, 0.0,
    0.40584515137739717, 0.74153118559939444, 0.94910791234275852};
constexpr double kWeights7[] = {
    0.12948496616886969, 0.27970539148927667, 0.38183005050511894,
    0.41795918367346939, 0.38183005050511894, 0.27970539148927667,
    0.12948496616886969};

}  // namespace

GaussRule gauss_rule(int order) {
    switch (order) {
        case 3: return {kNodes3, kWeights3};
        case 5: return {kNodes5, kWeights5};
        case 7: return {kNodes7, kWeights7};
        default: throw std::invalid_argument("quad_order must be 3, 5 or 7");
    }
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 4) {
        double acc = values[0];
        for (std::size_t i = 1; i < n; ++i) acc += values[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace varcheck
