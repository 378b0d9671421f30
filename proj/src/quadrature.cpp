#include "onebit/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace onebit {

namespace {

// Orthonormal probabilists' Hermite recurrence:
//   q_{k+1}(x) = (x q_k(x) - sqrt(k) q_{k-1}(x)) / sqrt(k+1),  q_0 = 1.
// Returns q_n(x), q_{n-1}(x) and sum_{k<n} q_k(x)^2.
struct RecurrenceValue {
    double qn;
    double qn1;
    double sumsq;
};

RecurrenceValue orthonormal_hermite(int n, double x)
{
    double prev = 0.0;
    double cur = 1.0;
    double sumsq = 0.0;
    for (int k = 0; k < n; ++k) {
        sumsq += cur * cur;
        const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev)
                            / std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
    }
    return {cur, prev, sumsq};
}

}  // namespace

GaussRule gauss_hermite(int order)
{
    // the unscaled recurrence overflows past a few hundred nodes
    if (order < 1 || order > 256)
        throw std::invalid_argument("gauss_hermite: order must be in [1, 256]");

    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi, Eigen::EigenvaluesOnly);

    GaussRule rule;
    rule.nodes = es.eigenvalues();
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        double x = rule.nodes(i);
        // q_n'(x) = sqrt(n) q_{n-1}(x)
        for (int it = 0; it < 3; ++it) {
            const auto r = orthonormal_hermite(order, x);
            const double deriv = std::sqrt(static_cast<double>(order)) * r.qn1;
            if (deriv == 0.0)
                break;
            x -= r.qn / deriv;
        }
        rule.nodes(i) = x;
        rule.weights(i) = 1.0 / orthonormal_hermite(order, x).sumsq;
    }
    // symmetric rule: enforce exact antisymmetry of nodes
    for (int i = 0; i < order / 2; ++i) {
        const double a = 0.5 * (rule.nodes(order - 1 - i) - rule.nodes(i));
        const double w = 0.5 * (rule.weights(i) + rule.weights(order - 1 - i));
        rule.nodes(i) = -a;
        rule.nodes(order - 1 - i) = a;
        rule.weights(i) = w;
        rule.weights(order - 1 - i) = w;
    }
    if (order % 2 == 1)
        rule.nodes(order / 2) = 0.0;
    return rule;
}

}  // namespace onebit
