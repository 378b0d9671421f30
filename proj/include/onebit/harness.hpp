#pragma once

#include "onebit/link_models.hpp"
#include "onebit/moment_estimator.hpp"
#include "onebit/synth.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace onebit {

enum class Experiment { eigs, lowdim, sparse, diag };

enum class EstimatorChoice { automatic, difference, sum };

Experiment parse_experiment(const std::string& name);
const char* to_string(Experiment e);

/// Settings for one CLI run. Empty grids are filled with the experiment's
/// defaults by resolve().
struct RunConfig {
    Experiment experiment = Experiment::lowdim;
    std::string model = "cs";  // flr | cs | pr

    // Noise parameter grid of the chosen model (pe, sigma or theta).
    std::vector<double> noise;
    double zeta = 0.0;

    std::vector<int> n;
    std::vector<int> p;
    std::vector<int> s;
    int trials = 0;
    std::uint64_t seed = 20160521;

    int t_max = 500;
    double tol = 1e-10;
    double rho_const = 1.0;
    std::optional<int> s_hat;
    double admm_tol = 1e-6;
    int admm_max_iter = 2000;
    EstimatorChoice estimator = EstimatorChoice::automatic;
    int quad_order = kDefaultQuadOrder;

    int threads = 1;
    std::string out;  // empty: stdout

    /// Fills empty grids and trials with per-experiment defaults, then
    /// validates. Throws ConfigError.
    void resolve();
};

LinkModel make_model(const std::string& tag, double noise, double zeta = 0.0);

/// Default noise parameter of each model: pe = 0.1, sigma^2 = 0.1, theta = 1.
double default_noise(const std::string& tag);

struct ExperimentRow {
    std::string experiment;
    std::string model;
    std::string param_name;
    double param_value = 0.0;
    int n = 0;
    int p = 0;
    std::optional<int> s;
    int trial = 0;
    std::optional<double> abscissa;
    std::optional<double> lambda1_over4;
    std::optional<double> lambda2_over4;
    std::optional<double> err;
    std::optional<double> err_signfree;
    std::optional<int> iters;
    std::optional<bool> converged;
};

inline constexpr const char* kCsvHeader =
    "experiment,model,param_name,param_value,n,p,s,trial,abscissa,lambda1_over4,"
    "lambda2_over4,err,err_signfree,iters,converged";

/// ||b - b*||, or min(||b - b*||, ||b + b*||) when sign_invariant.
/// Throws ConfigError unless both are unit norm to 1e-6.
double estimation_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star,
                        bool sign_invariant);

std::vector<ExperimentRow> run_eigenstructure(const RunConfig& cfg);
std::vector<ExperimentRow> run_lowdim(const RunConfig& cfg);
std::vector<ExperimentRow> run_sparse(const RunConfig& cfg);
/// Dispatches on cfg.experiment (not diag).
std::vector<ExperimentRow> run_experiment(const RunConfig& cfg);

/// Human-readable moments and theory diagnostics per noise grid point.
void run_diag(const RunConfig& cfg, std::ostream& os);

/// Estimator used for a model: automatic picks M' when phi < 0.
MomentKind resolve_kind(const LinkModel& model, EstimatorChoice choice, int quad_order);

/// Fantope penalty used by run_sparse:
/// rho_const * (|phi| + 1 -+ mu0^2) * sqrt(log p / n), sign by estimator kind.
double sparse_rho(const RunConfig& cfg, const LinkModel& model, MomentKind kind, int n, int p);

struct TrialData {
    GroundTruth truth;
    Dataset data;
    MomentMatrix moment;
};

/// Regenerates the ground truth, dataset and moment matrix of trial 0 at the
/// first grid point, with the same draws as the experiment run.
TrialData first_trial_data(const RunConfig& cfg);

void write_rows_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);

/// Per grid point aggregate of the trials.
struct GridSummary {
    std::string param_name;
    double param_value = 0.0;
    int n = 0;
    int p = 0;
    std::optional<int> s;
    std::optional<double> abscissa;
    int trials = 0;
    double median_err = 0.0;  // err_signfree for recovery, lambda gap/4 for eigs
    double mean_err = 0.0;
    double mean_lambda1_over4 = 0.0;
    double mean_lambda2_over4 = 0.0;
};

std::vector<GridSummary> summarize(const std::vector<ExperimentRow>& rows);
void write_summary(std::ostream& os, const std::vector<GridSummary>& summary);

}  // namespace onebit
