#pragma once

#include "onebit/link_models.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace onebit {

using Rng = std::mt19937_64;

/// Independent stream for a position in an experiment, e.g.
/// derive_stream(seed, {grid_index, trial}). Streams depend only on the path,
/// never on evaluation order.
Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

struct GroundTruth {
    Eigen::VectorXd beta_star;
    std::vector<int> support;  // ascending
};

/// n observations; labels are exactly +-1, rows of covariates are samples.
struct Dataset {
    Eigen::VectorXi labels;
    Eigen::MatrixXd covariates;
    bool trimmed = false;  // an odd trailing observation was dropped

    Eigen::Index n() const { return labels.size(); }
    Eigen::Index p() const { return covariates.cols(); }
};

/// Uniform on the sphere S^{p-1}.
GroundTruth sample_beta_dense(int p, Rng& rng);
/// Uniform size-s support, uniform direction on it, exact zeros elsewhere.
GroundTruth sample_beta_sparse(int p, int s, Rng& rng);

/// Y = +1 with probability (f(z) + 1) / 2, one uniform draw.
int draw_label(const LinkModel& model, double z, Rng& rng);

/// X ~ N(0, I_p) rows, labels from draw_label. Odd n drops the last sample
/// and sets Dataset::trimmed.
Dataset generate_dataset(const LinkModel& model, const GroundTruth& truth, int n, Rng& rng);

/// Validates and trims (if odd) user-supplied data.
Dataset make_dataset(Eigen::VectorXi labels, Eigen::MatrixXd covariates);

}  // namespace onebit
