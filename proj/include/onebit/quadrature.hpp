#pragma once

#include <Eigen/Core>

namespace onebit {

/// Gauss-Hermite rule for the standard normal weight: nodes z_i and weights
/// w_i with sum_i w_i g(z_i) ~= E[g(Z)], Z ~ N(0,1). Weights sum to one.
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Golub-Welsch on the probabilists' Hermite Jacobi matrix, nodes polished by
// Newton on the orthonormal recurrence. 1 <= order <= 256.
GaussRule gauss_hermite(int order);

template <typename F>
double normal_expectation(const GaussRule& rule, F&& g)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights(i) * g(rule.nodes(i));
    return acc;
}

}  // namespace onebit
