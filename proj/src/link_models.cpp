#include "onebit/link_models.hpp"

#include "onebit/errors.hpp"
#include "onebit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace onebit {

LinkModel::LinkModel(FlippedLogistic m) : model_(m)
{
    if (!(m.flip_prob >= 0.0 && m.flip_prob < 0.5))
        throw ConfigError("flip probability must lie in [0, 0.5)");
    if (!std::isfinite(m.intercept))
        throw ConfigError("intercept must be finite");
}

LinkModel::LinkModel(OneBitCS m) : model_(m)
{
    if (!(m.noise_sd >= 0.0) || !std::isfinite(m.noise_sd))
        throw ConfigError("noise standard deviation must be finite and >= 0");
}

LinkModel::LinkModel(OneBitPR m) : model_(m)
{
    if (!(m.threshold > 0.0) || !std::isfinite(m.threshold))
        throw ConfigError("phase retrieval threshold must be finite and > 0");
}

std::string LinkModel::tag() const
{
    static constexpr const char* tags[] = {"flr", "cs", "pr"};
    return tags[model_.index()];
}

std::string LinkModel::param_name() const
{
    static constexpr const char* names[] = {"pe", "sigma", "theta"};
    return names[model_.index()];
}

double LinkModel::param_value() const
{
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FlippedLogistic>)
                return m.flip_prob;
            else if constexpr (std::is_same_v<T, OneBitCS>)
                return m.noise_sd;
            else
                return m.threshold;
        },
        model_);
}

bool LinkModel::deterministic() const
{
    if (const auto* cs = std::get_if<OneBitCS>(&model_))
        return cs->noise_sd == 0.0;
    return std::holds_alternative<OneBitPR>(model_);
}

bool LinkModel::odd() const
{
    if (const auto* flr = std::get_if<FlippedLogistic>(&model_))
        return flr->intercept == 0.0;
    return std::holds_alternative<OneBitCS>(model_);
}

double normal_pdf(double z)
{
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double link_eval(const LinkModel& model, double z)
{
    return std::visit(
        [z](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FlippedLogistic>) {
                // (e^u - 1)/(e^u + 1) - 2 pe (e^u - 1)/(e^u + 1) with u = z + zeta
                return (1.0 - 2.0 * m.flip_prob) * std::tanh(0.5 * (z + m.intercept));
            } else if constexpr (std::is_same_v<T, OneBitCS>) {
                if (m.noise_sd == 0.0)
                    return sign_of(z);
                // 2 Phi(z / sigma) - 1
                return std::erf(z / (m.noise_sd * std::numbers::sqrt2));
            } else {
                return sign_of(std::abs(z) - m.threshold);
            }
        },
        model.variant());
}

namespace {

MomentSummary finish(double mu0, double mu1, double mu2, MomentMethod method)
{
    return {mu0, mu1, mu2, mu1 * mu1 - mu0 * mu2 + mu0 * mu0, method};
}

}  // namespace

MomentSummary moments(const LinkModel& model, int quad_order)
{
    if (quad_order < 8)
        throw ConfigError("quadrature order must be at least 8");

    if (const auto* cs = std::get_if<OneBitCS>(&model.variant())) {
        // Stein: mu1 = E f'(Z) = 2 E[phi(Z/sigma)/sigma] = sqrt(2 / (pi (1 + sigma^2)))
        const double s2 = cs->noise_sd * cs->noise_sd;
        return finish(0.0, std::sqrt(2.0 / (std::numbers::pi * (1.0 + s2))), 0.0,
                      MomentMethod::closed_form);
    }
    if (const auto* pr = std::get_if<OneBitPR>(&model.variant())) {
        const double theta = pr->threshold;
        const double p1 = std::erfc(theta / std::numbers::sqrt2);  // P(|Z| >= theta)
        // E[Z^2 1{|Z| >= theta}] = p1 + 2 theta phi(theta)
        const double tail2 = p1 + 2.0 * theta * normal_pdf(theta);
        return finish(2.0 * p1 - 1.0, 0.0, 2.0 * tail2 - 1.0, MomentMethod::closed_form);
    }

    const GaussRule rule = gauss_hermite(quad_order);
    double mu0 = 0.0, mu1 = 0.0, mu2 = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        const double z = rule.nodes(i);
        const double wf = rule.weights(i) * link_eval(model, z);
        mu0 += wf;
        mu1 += wf * z;
        mu2 += wf * z * z;
    }
    return finish(mu0, mu1, mu2, MomentMethod::quadrature);
}

double theta_median()
{
    double lo = 0.0, hi = 2.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < 0.75)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

TheoryDiagnostics theory_diagnostics(const LinkModel& model, int p, std::optional<int> s,
                                     int quad_order, double n_min_const)
{
    if (p < 1)
        throw ConfigError("dimension p must be positive");
    if (s && (*s < 1 || *s > p))
        throw ConfigError("sparsity s must lie in [1, p]");

    const MomentSummary mom = moments(model, quad_order);
    if (!(mom.phi > 0.0))
        throw ConfigError("phi(f) <= 0 for this link: the top eigenvector of the difference "
                          "estimator M is not beta*; use the sum-type estimator M'");

    const double phi = mom.phi;
    const double base = 1.0 - mom.mu0 * mom.mu0;

    TheoryDiagnostics d;
    d.gamma = (base / (phi + base) + 1.0) / 2.0;
    d.xi = (d.gamma * phi + (d.gamma - 1.0) * base) / ((1.0 + d.gamma) * (phi + base));
    d.kappa = (4.0 * base + phi) / (4.0 * base + 3.0 * phi);

    const double root = std::sqrt(d.kappa);
    if (s) {
        const double factor = std::min(d.kappa * (1.0 - root) / 2.0, d.kappa / 8.0);
        d.n_min = n_min_const * double(*s) * double(*s) * std::log(double(p)) * phi * phi
                  * factor / ((base + phi) * (base + phi));
    }
    const double gap = 1.0 / root - 1.0;
    d.s_hat_multiplier = std::max(std::ceil(1.0 / (gap * gap)), 1.0);
    d.dense_rate_factor = (phi + base) / phi;
    d.sparse_rate_factor = std::pow(phi + base, 2.5) * std::sqrt(base) / (phi * phi * phi);
    d.theta_m = theta_median();
    return d;
}

}  // namespace onebit
