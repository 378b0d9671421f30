#include "onebit/sparse_recovery.hpp"

namespace onebit {

void SparseConfig::validate(Eigen::Index p) const
{
    if (!(rho >= 0.0))
        throw ConfigError("rho must be non-negative");
    if (s_hat < 1 || s_hat > p)
        throw ConfigError("s_hat must lie in [1, p]");
    if (t_max < 1)
        throw ConfigError("t_max must be at least 1");
    if (!(tol >= 0.0))
        throw ConfigError("power tolerance must be non-negative");
    if (std::isnan(admm_penalty))
        throw ConfigError("ADMM penalty must be a number");
    if (!(admm_tol > 0.0) || admm_max_iter < 1)
        throw ConfigError("ADMM tolerance and iteration cap must be positive");
}

double default_rho(Eigen::Index n, Eigen::Index p, double c)
{
    return c * std::sqrt(std::log(double(p)) / double(n));
}

SparseReport sparse_recover(const MomentMatrix& moment, const SparseConfig& cfg)
{
    const auto p = moment.entries.rows();
    cfg.validate(p);

    SparseReport report;
    report.kind = moment.kind;
    report.relaxation = fantope_admm(moment.entries, cfg);

    const auto lead = top_two_eigs(report.relaxation.Pi);
    report.pi_eigengap = lead.lambda1 - lead.lambda2;
    report.beta_init = truncate(lead.v1, cfg.s_hat);

    report.recovery = truncated_power_method(moment.entries, report.beta_init, cfg);
    if (!report.relaxation.converged)
        report.recovery.converged = false;
    return report;
}

SparseReport sparse_recover(const Dataset& data, const SparseConfig& cfg, MomentKind kind)
{
    cfg.validate(data.p());
    return sparse_recover(build_moment(data, kind), cfg);
}

}  // namespace onebit
