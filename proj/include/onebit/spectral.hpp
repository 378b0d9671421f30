#pragma once

#include "onebit/errors.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace onebit {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar = double>
struct BasicRecoveryReport {
    Vec<Scalar> beta_hat;
    int iterations = 0;
    std::vector<Scalar> rayleigh_trace;  // beta_t' M beta_t, t = 1..iterations
    std::vector<Scalar> step_trace;      // sign-aligned ||beta_t - beta_{t-1}||
    bool converged = false;
};

using RecoveryReport = BasicRecoveryReport<double>;

inline constexpr int kDefaultPowerIterations = 500;
inline constexpr double kDefaultPowerTol = 1e-10;

/// Flips v so that its largest-magnitude entry (lowest index on ties) is positive.
template <typename Derived>
void sign_normalize(Eigen::MatrixBase<Derived>& v)
{
    using std::abs;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (abs(v(i)) > abs(v(best)))
            best = i;
    if (v.size() > 0 && v(best) < 0)
        v = -v;
}

template <typename Derived>
Vec<typename Derived::Scalar> sign_normalized(const Eigen::MatrixBase<Derived>& v)
{
    Vec<typename Derived::Scalar> out = v;
    sign_normalize(out);
    return out;
}

/// Distance between a and b after flipping b to a's half-space.
template <typename DA, typename DB>
typename DA::Scalar aligned_distance(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b)
{
    return a.dot(b) >= 0 ? (a - b).norm() : (a + b).norm();
}

template <typename Scalar>
using IterateObserver = std::function<void(int, const Vec<Scalar>&)>;

namespace detail {

// beta_t = project(M beta_{t-1}); project must return a unit vector or throw.
template <typename DM, typename DB, typename Project>
BasicRecoveryReport<typename DM::Scalar> iterate_power(
    const Eigen::MatrixBase<DM>& m, const Eigen::MatrixBase<DB>& beta0, int t_max,
    typename DM::Scalar tol, Project&& project,
    const IterateObserver<typename DM::Scalar>& observe)
{
    using Scalar = typename DM::Scalar;
    using std::abs;
    if (m.rows() != m.cols() || m.rows() != beta0.size())
        throw ConfigError("power iteration: dimension mismatch");
    if (t_max < 1)
        throw ConfigError("power iteration: t_max must be at least 1");
    const Scalar unit_tol = std::max(Scalar(1e-8), 100 * Eigen::NumTraits<Scalar>::epsilon());
    if (abs(beta0.norm() - Scalar(1)) > unit_tol)
        throw ConfigError("power iteration: initial vector must have unit norm");
    if (m.isZero(0))
        throw NumericalError("no dominant direction: moment matrix is zero");

    BasicRecoveryReport<Scalar> report;
    Vec<Scalar> beta = beta0;
    Vec<Scalar> next(beta.size());
    for (int t = 1; t <= t_max; ++t) {
        next.noalias() = m * beta;
        if (next.isZero(0))
            throw NumericalError("no dominant direction: M beta vanished");
        next = project(next);
        const Scalar step = aligned_distance(beta, next);
        beta.swap(next);
        report.iterations = t;
        report.rayleigh_trace.push_back(beta.dot(m * beta));
        report.step_trace.push_back(step);
        if (observe)
            observe(t, beta);
        if (tol > 0 ? step <= tol : step == 0) {
            report.converged = true;
            break;
        }
    }
    sign_normalize(beta);
    report.beta_hat = std::move(beta);
    return report;
}

}  // namespace detail

/// Power iteration: beta_t = M beta_{t-1} / ||M beta_{t-1}||. Stops once the
/// sign-aligned step is <= tol (tol = 0: only on an exact fixed point) or at
/// t_max. Throws NumericalError for a zero matrix or a vanishing product.
template <typename DM, typename DB>
BasicRecoveryReport<typename DM::Scalar> power_method(
    const Eigen::MatrixBase<DM>& m, const Eigen::MatrixBase<DB>& beta0,
    int t_max = kDefaultPowerIterations,
    typename DM::Scalar tol = typename DM::Scalar(kDefaultPowerTol),
    const IterateObserver<typename DM::Scalar>& observe = {})
{
    using Scalar = typename DM::Scalar;
    return detail::iterate_power(
        m, beta0, t_max, tol, [](const Vec<Scalar>& v) -> Vec<Scalar> { return v / v.norm(); },
        observe);
}

template <typename Scalar = double>
struct TopTwo {
    Scalar lambda1 = 0;
    Scalar lambda2 = 0;
    Vec<Scalar> v1;  // sign-normalized
};

/// Two largest eigenvalues of a symmetric matrix and the leading eigenvector.
template <typename DM>
TopTwo<typename DM::Scalar> top_two_eigs(const Eigen::MatrixBase<DM>& m)
{
    using Scalar = typename DM::Scalar;
    if (m.rows() != m.cols())
        throw ConfigError("top_two_eigs: matrix must be square");
    if (m.rows() < 2)
        throw ConfigError("top_two_eigs: dimension must be at least 2");

    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(m.derived());
    if (es.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver failed");
    const auto p = m.rows();
    TopTwo<Scalar> out;
    out.lambda1 = es.eigenvalues()(p - 1);
    out.lambda2 = es.eigenvalues()(p - 2);
    out.v1 = es.eigenvectors().col(p - 1);
    sign_normalize(out.v1);
    return out;
}

}  // namespace onebit
