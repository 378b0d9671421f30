#include "onebit/moment_estimator.hpp"

#include "onebit/errors.hpp"

#include <algorithm>

namespace onebit {

namespace {

// Pairs per partial Gram product; boundaries depend on n only.
constexpr Eigen::Index kChunkPairs = 4096;

}  // namespace

MomentMatrix build_moment(const Dataset& data, MomentKind kind)
{
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    if (n < 2)
        throw ConfigError("second moment needs at least one pair of observations");
    if (n % 2 != 0)
        throw ConfigError("second moment needs an even number of observations");

    const Eigen::Index pairs = n / 2;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd diffs(std::min(pairs, kChunkPairs), p);

    for (Eigen::Index begin = 0; begin < pairs; begin += kChunkPairs) {
        const Eigen::Index end = std::min(pairs, begin + kChunkPairs);
        Eigen::Index active = 0;
        for (Eigen::Index i = begin; i < end; ++i) {
            const int first = data.labels(2 * i);
            const int second = data.labels(2 * i + 1);
            const int w = kind == MomentKind::difference ? second - first : second + first;
            // w * w is 0 or 4
            if (w == 0)
                continue;
            diffs.row(active++) = data.covariates.row(2 * i + 1) - data.covariates.row(2 * i);
        }
        if (active > 0) {
            const auto block = diffs.topRows(active);
            acc.noalias() += block.transpose() * block;
        }
    }

    MomentMatrix out;
    out.kind = kind;
    out.n_pairs = pairs;
    out.entries = (4.0 * 2.0 / double(n)) * acc;
    out.entries = (0.5 * (out.entries + out.entries.transpose())).eval();
    return out;
}

MomentMatrix expected_moment(const LinkModel& model, const Eigen::VectorXd& beta_star,
                             MomentKind kind, int quad_order)
{
    const MomentSummary m = moments(model, quad_order);
    const auto p = beta_star.size();
    const Eigen::MatrixXd outer = beta_star * beta_star.transpose();

    MomentMatrix out;
    out.kind = kind;
    if (kind == MomentKind::difference)
        out.entries = 4.0 * m.phi * outer
                      + 4.0 * (1.0 - m.mu0 * m.mu0) * Eigen::MatrixXd::Identity(p, p);
    else
        out.entries = -4.0 * m.phi * outer
                      + 4.0 * (1.0 + m.mu0 * m.mu0) * Eigen::MatrixXd::Identity(p, p);
    return out;
}

MomentKind select_kind(const LinkModel& model, int quad_order)
{
    return moments(model, quad_order).phi >= 0.0 ? MomentKind::difference : MomentKind::sum;
}

const char* to_string(MomentKind kind)
{
    return kind == MomentKind::difference ? "difference" : "sum";
}

}  // namespace onebit
