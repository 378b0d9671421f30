#include "onebit/synth.hpp"

#include "onebit/errors.hpp"

#include <algorithm>
#include <numeric>

namespace onebit {

Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
{
    std::vector<std::uint32_t> words;
    words.reserve(2 * (path.size() + 1));
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto v : path)
        push(v);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

namespace {

Eigen::VectorXd gaussian_direction(int dim, Rng& rng)
{
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(dim);
    double norm = 0.0;
    do {
        for (int i = 0; i < dim; ++i)
            v(i) = normal(rng);
        norm = v.norm();
    } while (norm == 0.0);
    return v / norm;
}

}  // namespace

GroundTruth sample_beta_dense(int p, Rng& rng)
{
    if (p < 1)
        throw ConfigError("dimension p must be positive");
    GroundTruth truth;
    truth.beta_star = gaussian_direction(p, rng);
    truth.support.resize(p);
    std::iota(truth.support.begin(), truth.support.end(), 0);
    return truth;
}

GroundTruth sample_beta_sparse(int p, int s, Rng& rng)
{
    if (p < 1)
        throw ConfigError("dimension p must be positive");
    if (s < 1 || s > p)
        throw ConfigError("sparsity s must lie in [1, p]");

    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    GroundTruth truth;
    std::sample(all.begin(), all.end(), std::back_inserter(truth.support), s, rng);

    const Eigen::VectorXd dir = gaussian_direction(s, rng);
    truth.beta_star = Eigen::VectorXd::Zero(p);
    for (int k = 0; k < s; ++k)
        truth.beta_star(truth.support[k]) = dir(k);
    return truth;
}

int draw_label(const LinkModel& model, double z, Rng& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double prob_plus = 0.5 * (link_eval(model, z) + 1.0);
    return unif(rng) < prob_plus ? 1 : -1;
}

Dataset generate_dataset(const LinkModel& model, const GroundTruth& truth, int n, Rng& rng)
{
    if (n < 2)
        throw ConfigError("sample size n must be at least 2");
    const auto p = truth.beta_star.size();
    const int kept = n - n % 2;

    Dataset data;
    data.trimmed = (kept != n);
    data.labels.resize(kept);
    data.covariates.resize(kept, p);

    std::normal_distribution<double> normal;
    for (int i = 0; i < kept; ++i) {
        for (Eigen::Index j = 0; j < p; ++j)
            data.covariates(i, j) = normal(rng);
        data.labels(i) = draw_label(model, data.covariates.row(i).dot(truth.beta_star), rng);
    }
    return data;
}

Dataset make_dataset(Eigen::VectorXi labels, Eigen::MatrixXd covariates)
{
    if (labels.size() != covariates.rows())
        throw ConfigError("label count does not match covariate rows");
    if (labels.size() < 2)
        throw ConfigError("dataset needs at least 2 observations");
    if ((labels.array().abs() != 1).any())
        throw ConfigError("labels must be exactly +1 or -1");
    if (!covariates.allFinite())
        throw ConfigError("covariates must be finite");

    Dataset data;
    const Eigen::Index kept = labels.size() - labels.size() % 2;
    data.trimmed = kept != labels.size();
    data.labels = labels.head(kept);
    data.covariates = covariates.topRows(kept);
    return data;
}

}  // namespace onebit
