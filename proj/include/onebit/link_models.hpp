#pragma once

#include <optional>
#include <string>
#include <variant>

namespace onebit {

/// Logistic link with intercept, labels flipped with probability flip_prob.
struct FlippedLogistic {
    double intercept = 0.0;
    double flip_prob = 0.0;
};

/// y = sign(<x, beta*> + eps), eps ~ N(0, noise_sd^2).
struct OneBitCS {
    double noise_sd = 0.0;
};

/// y = sign(|<x, beta*>| - threshold).
struct OneBitPR {
    double threshold = 1.0;
};

/// Conditional law of Y given the index z = <x, beta*>:
/// P(Y = 1 | z) = (f(z) + 1) / 2.
class LinkModel {
public:
    using Variant = std::variant<FlippedLogistic, OneBitCS, OneBitPR>;

    // Throws ConfigError unless flip_prob in [0, 0.5), noise_sd >= 0, threshold > 0.
    LinkModel(FlippedLogistic m);
    LinkModel(OneBitCS m);
    LinkModel(OneBitPR m);

    const Variant& variant() const { return model_; }

    /// Short tag used on the CLI and in CSV output: "flr", "cs" or "pr".
    std::string tag() const;
    /// Name and value of the model's noise parameter, e.g. {"pe", 0.1}.
    std::string param_name() const;
    double param_value() const;

    /// f takes values in {-1, +1} only (noiseless CS, phase retrieval).
    bool deterministic() const;
    bool odd() const;

private:
    Variant model_;
};

double normal_pdf(double z);
/// Standard normal CDF via erfc.
double normal_cdf(double z);

/// sign with sign(0) = +1.
inline double sign_of(double z) { return z >= 0.0 ? 1.0 : -1.0; }

double link_eval(const LinkModel& model, double z);

enum class MomentMethod { closed_form, quadrature };

/// Gaussian functionals mu_k = E[f(Z) Z^k] and the eigengap
/// phi = mu1^2 - mu0 mu2 + mu0^2.
struct MomentSummary {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double phi = 0.0;
    MomentMethod method = MomentMethod::closed_form;
};

inline constexpr int kDefaultQuadOrder = 64;

/// Flipped logistic goes through Gauss-Hermite of the given order; the
/// sign-type links always use closed forms. Throws ConfigError if
/// quad_order < 8.
MomentSummary moments(const LinkModel& model, int quad_order = kDefaultQuadOrder);

/// Median of |Z|, i.e. the 0.75 normal quantile.
double theta_median();

struct TheoryDiagnostics {
    double gamma = 0.0;
    double xi = 0.0;
    double kappa = 0.0;
    /// Minimum sample size for the sparse pipeline with its constant set to
    /// n_min_const, evaluated as printed. Empty without s.
    std::optional<double> n_min;
    /// Truncation multiplier max(ceil(1 / (kappa^{-1/2} - 1)^2), 1); s_hat = mult * s.
    double s_hat_multiplier = 1.0;
    /// (phi + 1 - mu0^2) / phi, the dense statistical-error prefactor.
    double dense_rate_factor = 0.0;
    /// [phi + 1 - mu0^2]^{5/2} (1 - mu0^2)^{1/2} / phi^3, the sparse one.
    double sparse_rate_factor = 0.0;
    double theta_m = 0.0;
};

/// Requires phi > 0; throws ConfigError otherwise, with a hint to switch to
/// the sum-type estimator.
TheoryDiagnostics theory_diagnostics(const LinkModel& model, int p, std::optional<int> s,
                                     int quad_order = kDefaultQuadOrder,
                                     double n_min_const = 1.0);

}  // namespace onebit
