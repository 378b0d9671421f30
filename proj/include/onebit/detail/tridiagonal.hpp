#pragma once

// Eigenvectors of a symmetric tridiagonal matrix for a few known eigenvalues,
// by inverse iteration with a pivoted tridiagonal LU (LAPACK gttrf/gtts2
// layout).

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace onebit::detail {

template <typename Scalar>
class ShiftedTridiagonalLU {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    ShiftedTridiagonalLU(const Vector& diag, const Vector& offdiag, Scalar shift, Scalar tiny)
        : d_(diag.array() - shift), dl_(offdiag), du_(offdiag),
          du2_(Vector::Zero(std::max<Eigen::Index>(diag.size() - 2, 0))),
          swapped_(std::max<Eigen::Index>(diag.size() - 1, 0), false)
    {
        using std::abs;
        const Eigen::Index n = d_.size();
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            if (abs(d_(i)) >= abs(dl_(i))) {
                if (d_(i) == Scalar(0))
                    d_(i) = tiny;
                const Scalar fact = dl_(i) / d_(i);
                dl_(i) = fact;
                d_(i + 1) -= fact * du_(i);
            } else {
                const Scalar fact = d_(i) / dl_(i);
                d_(i) = dl_(i);
                dl_(i) = fact;
                const Scalar temp = du_(i);
                du_(i) = d_(i + 1);
                d_(i + 1) = temp - fact * d_(i + 1);
                if (i + 2 < n) {
                    du2_(i) = du_(i + 1);
                    du_(i + 1) = -fact * du_(i + 1);
                }
                swapped_[i] = true;
            }
        }
        if (n > 0 && d_(n - 1) == Scalar(0))
            d_(n - 1) = tiny;
    }

    void solve_in_place(Vector& b) const
    {
        const Eigen::Index n = d_.size();
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            if (!swapped_[i]) {
                b(i + 1) -= dl_(i) * b(i);
            } else {
                const Scalar temp = b(i) - dl_(i) * b(i + 1);
                b(i) = b(i + 1);
                b(i + 1) = temp;
            }
        }
        b(n - 1) /= d_(n - 1);
        if (n > 1)
            b(n - 2) = (b(n - 2) - du_(n - 2) * b(n - 1)) / d_(n - 2);
        for (Eigen::Index i = n - 3; i >= 0; --i)
            b(i) = (b(i) - du_(i) * b(i + 1) - du2_(i) * b(i + 2)) / d_(i);
    }

private:
    Vector d_, dl_, du_, du2_;
    std::vector<bool> swapped_;
};

/// Number of eigenvalues of tridiag(offdiag, diag, offdiag) below x, from the
/// signs of the LDL' pivots of T - x I.
template <typename Scalar>
Eigen::Index sturm_count_below(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& diag,
                               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& offdiag_sq,
                               Scalar x, Scalar pivmin)
{
    using std::abs;
    Eigen::Index count = 0;
    Scalar q = diag(0) - x;
    for (Eigen::Index i = 0;; ++i) {
        if (abs(q) < pivmin)
            q = -pivmin;
        if (q < 0)
            ++count;
        if (i + 1 == diag.size())
            break;
        q = diag(i + 1) - x - offdiag_sq(i) / q;
    }
    return count;
}

/// Walks the spectrum of a symmetric tridiagonal matrix from the top,
/// isolating one eigenvalue at a time by Sturm bisection.
template <typename Scalar>
class TridiagonalSpectrumWalker {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    TridiagonalSpectrumWalker(const Vector& diag, const Vector& offdiag)
        : diag_(diag), offdiag_sq_(offdiag.cwiseAbs2())
    {
        using std::abs;
        const Eigen::Index n = diag.size();
        lo_ = hi_ = diag(0);
        for (Eigen::Index i = 0; i < n; ++i) {
            Scalar radius = 0;
            if (i > 0)
                radius += abs(offdiag(i - 1));
            if (i + 1 < n)
                radius += abs(offdiag(i));
            lo_ = std::min(lo_, diag(i) - radius);
            hi_ = std::max(hi_, diag(i) + radius);
        }
        const Scalar eps = std::numeric_limits<Scalar>::epsilon();
        const Scalar norm = std::max(abs(lo_), abs(hi_));
        pivmin_ = std::numeric_limits<Scalar>::min() * std::max(Scalar(1), offdiag_sq_.size() > 0 ? offdiag_sq_.maxCoeff() : Scalar(1));
        tol_ = 2 * eps * norm + pivmin_;
        lo_ -= tol_;
        hi_ += tol_;
        upper_ = hi_;
    }

    Eigen::Index size() const { return diag_.size(); }

    /// The next eigenvalue in descending order (multiplicities repeated).
    Scalar next()
    {
        const Eigen::Index n = diag_.size();
        const Eigen::Index target = n - 1 - found_;  // eigenvalues strictly below it
        Scalar lo = lo_, hi = upper_;
        while (hi - lo > tol_ + 2 * std::numeric_limits<Scalar>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
            const Scalar mid = lo + (hi - lo) / 2;
            if (mid <= lo || mid >= hi)
                break;
            (sturm_count_below(diag_, offdiag_sq_, mid, pivmin_) > target ? hi : lo) = mid;
        }
        ++found_;
        upper_ = hi;
        return lo + (hi - lo) / 2;
    }

private:
    Vector diag_, offdiag_sq_;
    Scalar lo_ = 0, hi_ = 0, upper_ = 0, pivmin_ = 0, tol_ = 0;
    Eigen::Index found_ = 0;
};

/// Orthonormal eigenvectors of tridiag(offdiag, diag, offdiag) for accurate,
/// distinct eigenvalues given in ascending order. Vectors of eigenvalues
/// closer than 1e-3 * scale are reorthogonalized on every iteration.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> tridiagonal_eigenvectors(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& diag,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& offdiag,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& eigenvalues, Scalar scale)
{
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = diag.size();
    const Eigen::Index k = eigenvalues.size();
    const Scalar tiny = std::numeric_limits<Scalar>::epsilon() * std::max(scale, Scalar(1));
    const Scalar cluster = Scalar(1e-3) * std::max(scale, Scalar(1));

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, k);
    Eigen::Index cluster_start = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (j > 0 && eigenvalues(j) - eigenvalues(j - 1) > cluster)
            cluster_start = j;
        ShiftedTridiagonalLU<Scalar> lu(diag, offdiag, eigenvalues(j) + tiny, tiny);
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i)
            x(i) = Scalar(1) + Scalar(0.5) * std::sin(Scalar(i + 1 + 7 * j));
        for (int it = 0; it < 3; ++it) {
            lu.solve_in_place(x);
            for (Eigen::Index c = cluster_start; c < j; ++c)
                x -= out.col(c).dot(x) * out.col(c);
            x /= x.norm();
        }
        out.col(j) = x;
    }
    return out;
}

}  // namespace onebit::detail
