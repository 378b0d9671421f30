#pragma once

#include "onebit/link_models.hpp"
#include "onebit/synth.hpp"

#include <Eigen/Core>

namespace onebit {

/// difference: weights (y_{2i} - y_{2i-1})^2, expectation 4 phi bb' + 4 (1 - mu0^2) I.
/// sum: weights (y_{2i} + y_{2i-1})^2, expectation -4 phi bb' + 4 (1 + mu0^2) I.
enum class MomentKind { difference, sum };

struct MomentMatrix {
    Eigen::MatrixXd entries;  // symmetric PSD, p x p
    MomentKind kind = MomentKind::difference;
    Eigen::Index n_pairs = 0;
};

/// Pairs consecutive observations (2i-1, 2i) in stored order.
MomentMatrix build_moment(const Dataset& data, MomentKind kind);

inline MomentMatrix second_moment(const Dataset& data)
{
    return build_moment(data, MomentKind::difference);
}

inline MomentMatrix second_moment_sum(const Dataset& data)
{
    return build_moment(data, MomentKind::sum);
}

/// Population value of build_moment for the given link and beta*.
MomentMatrix expected_moment(const LinkModel& model, const Eigen::VectorXd& beta_star,
                             MomentKind kind, int quad_order = kDefaultQuadOrder);

/// The estimator whose leading eigenvector is beta*: difference when phi >= 0.
MomentKind select_kind(const LinkModel& model, int quad_order = kDefaultQuadOrder);

const char* to_string(MomentKind kind);

}  // namespace onebit
