#pragma once

#include "onebit/detail/tridiagonal.hpp"
#include "onebit/errors.hpp"
#include "onebit/moment_estimator.hpp"
#include "onebit/spectral.hpp"
#include "onebit/synth.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace onebit {

struct SparseConfig {
    double rho = 0.0;           // l1,1 penalty on the Fantope relaxation
    int s_hat = 1;              // truncation level
    int t_max = kDefaultPowerIterations;
    double tol = kDefaultPowerTol;
    double admm_penalty = 0.0;  // tau; <= 0 picks admm_auto_penalty(M)
    double admm_tol = 1e-6;     // scaled by p
    int admm_max_iter = 2000;

    /// Throws ConfigError on an invalid field or s_hat > p.
    void validate(Eigen::Index p) const;
};

/// rho = c * sqrt(log p / n).
double default_rho(Eigen::Index n, Eigen::Index p, double c = 1.0);

/// Entrywise sign(a) max(|a| - t, 0).
template <typename Derived>
Mat<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& a,
                                             typename Derived::Scalar t)
{
    using Scalar = typename Derived::Scalar;
    if (!(t >= 0))
        throw ConfigError("soft_threshold: threshold must be non-negative");
    return a.unaryExpr([t](Scalar x) -> Scalar {
        using std::abs;
        const Scalar mag = abs(x) - t;
        if (mag <= 0)
            return Scalar(0);
        return x > 0 ? mag : -mag;
    });
}

/// Shift gamma with sum_i clamp(lambda_i - gamma, 0, 1) = 1, by bisection on
/// [min lambda - 1, max lambda], finished by solving exactly on the active set.
template <typename Derived>
typename Derived::Scalar fantope_shift(const Eigen::MatrixBase<Derived>& eigenvalues)
{
    using Scalar = typename Derived::Scalar;
    using std::abs;
    auto mass = [&](Scalar g) {
        Scalar total = 0;
        for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
            total += std::clamp(eigenvalues(i) - g, Scalar(0), Scalar(1));
        return total;
    };
    Scalar lo = eigenvalues.minCoeff() - 1;  // mass(lo) = p >= 1
    Scalar hi = eigenvalues.maxCoeff();      // mass(hi) = 0
    const Scalar eps = Scalar(1e-12) * std::max(Scalar(1), hi - lo);
    for (int it = 0; it < 200 && hi - lo > eps; ++it) {
        const Scalar mid = (lo + hi) / 2;
        (mass(mid) > 1 ? lo : hi) = mid;
    }
    Scalar gamma = (lo + hi) / 2;

    // On the bracket the clamp pattern is fixed; solve the linear equation.
    Scalar active_sum = 0;
    int active = 0, saturated = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const Scalar r = eigenvalues(i) - gamma;
        if (r >= 1)
            ++saturated;
        else if (r > 0) {
            active_sum += eigenvalues(i);
            ++active;
        }
    }
    if (active > 0) {
        const Scalar exact = (active_sum + Scalar(saturated) - 1) / Scalar(active);
        if (abs(exact - gamma) <= 4 * eps + Scalar(1e-12))
            gamma = exact;
    }
    return gamma;
}

namespace detail {

template <typename Scalar>
Mat<Scalar> fantope_project_full(const Mat<Scalar>& a)
{
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(a);
    if (es.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver failed");
    const Scalar gamma = fantope_shift(es.eigenvalues());
    const Vec<Scalar> clipped = (es.eigenvalues().array() - gamma).max(Scalar(0)).min(Scalar(1));
    Mat<Scalar> out = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    return (out + out.transpose()) / Scalar(2);
}

inline constexpr Eigen::Index kPartialProjectionMinDim = 32;
inline constexpr Eigen::Index kMaxWalked = 8;

// Only the eigenvectors with lambda > gamma contribute. When they are few and
// well separated, get eigenvalues from the tridiagonal form and the needed
// eigenvectors by inverse iteration. Returns false to request the full path.
// active_hint: number of active eigenvalues in a similar previous call (0 if
// unknown); updated on success.
template <typename Scalar>
bool fantope_project_partial(const Mat<Scalar>& a, Mat<Scalar>& out, Eigen::Index* active_hint = nullptr)
{
    using std::abs;
    const auto p = a.rows();
    Eigen::Tridiagonalization<Mat<Scalar>> tri(a);
    const Vec<Scalar> diag = tri.diagonal();
    const Vec<Scalar> sub = tri.subDiagonal();

    // Take eigenvalues from the top by bisection until the next one cannot be
    // active; past kMaxWalked it is cheaper to get the whole spectrum by QL.
    const Eigen::Index max_active = p / 4;
    std::vector<Scalar> top;
    Scalar gamma = 0;
    Scalar below = 0;
    bool walked = false;
    if (!active_hint || *active_hint < kMaxWalked) {
        detail::TridiagonalSpectrumWalker<Scalar> walker(diag, sub);
        top.push_back(walker.next());
        gamma = top[0] - 1;  // any level <= lambda_max - 1 fills one unit
        while (Eigen::Index(top.size()) < kMaxWalked) {
            below = walker.next();
            if (below <= gamma) {
                walked = true;
                break;
            }
            top.push_back(below);
            gamma = fantope_shift(Eigen::Map<const Vec<Scalar>>(top.data(), Eigen::Index(top.size())));
        }
    }
    if (!walked) {
        Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es;
        es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            return false;
        const Vec<Scalar> all = es.eigenvalues().reverse();
        gamma = fantope_shift(all);
        Eigen::Index m = 0;
        while (m < p && all(m) > gamma)
            ++m;
        if (m > max_active || m == p)
            return false;
        top.assign(all.data(), all.data() + m);
        below = all(m);
    }

    // Ascending active eigenvalues, then the nearest inactive one.
    Eigen::Index k = 0;
    while (k < Eigen::Index(top.size()) && top[k] - gamma > 0)
        ++k;
    if (k == 0)
        return false;
    const Scalar next_below = k < Eigen::Index(top.size()) ? top[k] : below;
    const Vec<Scalar> active = Eigen::Map<const Vec<Scalar>>(top.data(), k).reverse();
    const Scalar scale = std::max({abs(top[0]), abs(below), Scalar(1)});
    const Scalar min_gap = Scalar(1e-6) * scale;
    if (active(0) - next_below <= min_gap)
        return false;
    for (Eigen::Index i = 1; i < k; ++i)
        if (active(i) - active(i - 1) <= min_gap)
            return false;

    const Vec<Scalar> clipped = (active.array() - gamma).min(Scalar(1));
    const Mat<Scalar> x = tridiagonal_eigenvectors<Scalar>(diag, sub, active, scale);
    Mat<Scalar> y = x;
    tri.matrixQ().applyThisOnTheLeft(y);
    out = y * clipped.asDiagonal() * y.transpose();
    out = (out + out.transpose()) / Scalar(2);
    if (active_hint)
        *active_hint = k;
    return true;
}


}  // namespace detail

/// Frobenius projection onto {0 <= Pi <= I, tr Pi = 1}. A caller projecting
/// a sequence of similar matrices may pass active_hint to reuse the previous
/// number of eigenvalues above the water level.
template <typename Derived>
Mat<typename Derived::Scalar> fantope_project(const Eigen::MatrixBase<Derived>& a,
                                              Eigen::Index* active_hint = nullptr)
{
    using Scalar = typename Derived::Scalar;
    if (a.rows() != a.cols() || a.rows() == 0)
        throw ConfigError("fantope_project: matrix must be square and non-empty");
    const Scalar scale = a.norm();
    if ((a - a.transpose()).norm() > Scalar(1e-8) * scale)
        throw ConfigError("fantope_project: matrix is not symmetric");

    const Mat<Scalar> sym = a;
    Mat<Scalar> out;
    if (sym.rows() >= detail::kPartialProjectionMinDim
        && detail::fantope_project_partial(sym, out, active_hint))
        return out;
    return detail::fantope_project_full(sym);
}

/// tau = 5 tr(M) / p, or 1 when that is not positive.
template <typename Derived>
typename Derived::Scalar admm_auto_penalty(const Eigen::MatrixBase<Derived>& m)
{
    using Scalar = typename Derived::Scalar;
    const Scalar tau = Scalar(5) * m.trace() / Scalar(m.rows());
    return tau > 0 ? tau : Scalar(1);
}

template <typename Scalar = double>
struct BasicFantopeSolution {
    Mat<Scalar> Pi;  // Fantope-feasible iterate
    Mat<Scalar> Z;   // sparse (soft-thresholded) copy
    int iterations = 0;
    Scalar primal_residual = 0;  // ||Pi - Z||_F
    Scalar dual_residual = 0;    // tau ||Z - Z_prev||_F
    bool converged = false;
};

using FantopeSolution = BasicFantopeSolution<double>;

/// min -<M, Pi> + rho ||Pi||_{1,1} over the Fantope, ADMM with the split Pi = Z.
template <typename Derived>
BasicFantopeSolution<typename Derived::Scalar> fantope_admm(const Eigen::MatrixBase<Derived>& m,
                                                            const SparseConfig& cfg)
{
    using Scalar = typename Derived::Scalar;
    if (m.rows() != m.cols())
        throw ConfigError("fantope_admm: matrix must be square");
    const auto p = m.rows();
    if (!(cfg.rho >= 0))
        throw ConfigError("fantope_admm: rho must be non-negative");
    if (!(cfg.admm_tol > 0) || cfg.admm_max_iter < 1)
        throw ConfigError("fantope_admm: tolerance and iteration cap must be positive");

    const Scalar tau = cfg.admm_penalty > 0 ? Scalar(cfg.admm_penalty) : admm_auto_penalty(m);
    const Scalar threshold = Scalar(cfg.rho) / tau;
    const Scalar stop = Scalar(cfg.admm_tol) * Scalar(p);
    const Mat<Scalar> drift = m / tau;

    BasicFantopeSolution<Scalar> sol;
    sol.Z = Mat<Scalar>::Zero(p, p);
    Mat<Scalar> u = Mat<Scalar>::Zero(p, p);
    Mat<Scalar> z_prev;
    Eigen::Index active = 0;
    for (int k = 1; k <= cfg.admm_max_iter; ++k) {
        sol.Pi = fantope_project(sol.Z - u + drift, &active);
        z_prev = sol.Z;
        sol.Z = soft_threshold(sol.Pi + u, threshold);
        u += sol.Pi - sol.Z;
        sol.iterations = k;
        sol.primal_residual = (sol.Pi - sol.Z).norm();
        sol.dual_residual = tau * (sol.Z - z_prev).norm();
        if (sol.primal_residual <= stop && sol.dual_residual <= stop) {
            sol.converged = true;
            break;
        }
    }
    return sol;
}

/// Keeps the s_hat largest |v_j| (lower index wins ties), zeroes the rest and
/// renormalizes. Throws NumericalError if nothing survives.
template <typename Derived>
Vec<typename Derived::Scalar> truncate(const Eigen::MatrixBase<Derived>& v, int s_hat)
{
    using Scalar = typename Derived::Scalar;
    const auto p = v.size();
    if (s_hat < 1 || s_hat > p)
        throw ConfigError("truncate: s_hat must lie in [1, p]");

    Vec<Scalar> out;
    if (s_hat == p) {
        out = v;
    } else {
        std::vector<Eigen::Index> order(p);
        std::iota(order.begin(), order.end(), Eigen::Index(0));
        std::stable_sort(order.begin(), order.end(), [&v](Eigen::Index a, Eigen::Index b) {
            using std::abs;
            return abs(v(a)) > abs(v(b));
        });
        out = Vec<Scalar>::Zero(p);
        for (int k = 0; k < s_hat; ++k)
            out(order[k]) = v(order[k]);
    }
    const Scalar norm = out.norm();
    if (norm == 0)
        throw NumericalError("truncation annihilated the vector");
    return out / norm;
}

/// Power iteration with truncation to s_hat entries after every multiply.
/// beta0 need not be sparse; every iterate from t = 1 on is.
template <typename DM, typename DB>
BasicRecoveryReport<typename DM::Scalar> truncated_power_method(
    const Eigen::MatrixBase<DM>& m, const Eigen::MatrixBase<DB>& beta0, const SparseConfig& cfg,
    const IterateObserver<typename DM::Scalar>& observe = {})
{
    using Scalar = typename DM::Scalar;
    if (cfg.s_hat < 1 || cfg.s_hat > m.rows())
        throw ConfigError("truncated power method: s_hat must lie in [1, p]");
    const int s_hat = cfg.s_hat;
    return detail::iterate_power(
        m, beta0, cfg.t_max, Scalar(cfg.tol),
        [s_hat](const Vec<Scalar>& v) { return truncate(v, s_hat); }, observe);
}

struct SparseReport {
    RecoveryReport recovery;         // final truncated power iterate
    Eigen::VectorXd beta_init;       // truncated leading eigenvector of Pi
    FantopeSolution relaxation;
    double pi_eigengap = 0.0;        // lambda1 - lambda2 of Pi
    MomentKind kind = MomentKind::difference;
};

/// Full pipeline: moment matrix, Fantope relaxation, truncated eigenvector,
/// truncated power iterations. ADMM non-convergence only clears
/// recovery.converged.
SparseReport sparse_recover(const Dataset& data, const SparseConfig& cfg,
                            MomentKind kind = MomentKind::difference);

/// Same pipeline from a prebuilt moment matrix.
SparseReport sparse_recover(const MomentMatrix& moment, const SparseConfig& cfg);

}  // namespace onebit
