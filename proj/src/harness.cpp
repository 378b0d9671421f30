#include "onebit/harness.hpp"

#include "onebit/csv.hpp"
#include "onebit/errors.hpp"
#include "onebit/sparse_recovery.hpp"
#include "onebit/spectral.hpp"
#include "onebit/synth.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <tuple>

namespace onebit {

Experiment parse_experiment(const std::string& name)
{
    if (name == "eigs")
        return Experiment::eigs;
    if (name == "lowdim")
        return Experiment::lowdim;
    if (name == "sparse")
        return Experiment::sparse;
    if (name == "diag")
        return Experiment::diag;
    throw ConfigError("unknown experiment '" + name + "'");
}

const char* to_string(Experiment e)
{
    switch (e) {
    case Experiment::eigs: return "eigs";
    case Experiment::lowdim: return "lowdim";
    case Experiment::sparse: return "sparse";
    case Experiment::diag: return "diag";
    }
    return "?";
}

LinkModel make_model(const std::string& tag, double noise, double zeta)
{
    if (tag == "flr")
        return LinkModel(FlippedLogistic{zeta, noise});
    if (tag == "cs")
        return LinkModel(OneBitCS{noise});
    if (tag == "pr")
        return LinkModel(OneBitPR{noise});
    throw ConfigError("unknown model '" + tag + "' (expected flr, cs or pr)");
}

double default_noise(const std::string& tag)
{
    if (tag == "flr")
        return 0.1;
    if (tag == "cs")
        return std::sqrt(0.1);
    if (tag == "pr")
        return 1.0;
    throw ConfigError("unknown model '" + tag + "' (expected flr, cs or pr)");
}

namespace {

std::vector<double> default_sweep(const std::string& tag)
{
    if (tag == "flr")
        return {0.0, 0.1, 0.2, 0.3, 0.4};
    if (tag == "cs")
        return {0.0, 0.5, 1.0, 1.5, 2.0};
    return {0.3, 0.5, 0.7, 0.9, 1.1, 1.3};
}

template <typename T>
void fill_default(std::vector<T>& grid, std::initializer_list<T> values)
{
    if (grid.empty())
        grid.assign(values);
}

}  // namespace

void RunConfig::resolve()
{
    default_noise(model);  // validates the tag
    if (noise.empty()) {
        if (experiment == Experiment::eigs)
            noise = default_sweep(model);
        else
            noise = {default_noise(model)};
    }
    for (double v : noise)
        make_model(model, v, zeta);

    switch (experiment) {
    case Experiment::eigs:
        fill_default(n, {3000});
        fill_default(p, {20});
        if (trials == 0)
            trials = 10;
        break;
    case Experiment::lowdim:
        fill_default(n, {1000, 2000, 4000, 8000, 16000});
        fill_default(p, {10, 20, 40});
        if (trials == 0)
            trials = 100;
        break;
    case Experiment::sparse:
        fill_default(n, {1000, 2000, 4000});
        fill_default(p, {100, 200});
        fill_default(s, {5, 10});
        if (trials == 0)
            trials = 20;
        break;
    case Experiment::diag:
        fill_default(p, {20});
        if (trials == 0)
            trials = 1;
        break;
    }

    if (trials < 1)
        throw ConfigError("trials must be at least 1");
    if (threads < 1)
        throw ConfigError("threads must be at least 1");
    if (t_max < 1)
        throw ConfigError("tmax must be at least 1");
    if (!(tol >= 0.0))
        throw ConfigError("tolerance must be non-negative");
    if (!(rho_const >= 0.0))
        throw ConfigError("rho-const must be non-negative");
    if (!(admm_tol > 0.0) || admm_max_iter < 1)
        throw ConfigError("ADMM tolerance and iteration cap must be positive");
    if (s_hat && *s_hat < 1)
        throw ConfigError("shat must be at least 1");
    if (quad_order < 8)
        throw ConfigError("quadrature order must be at least 8");
    if (experiment != Experiment::diag && n.empty())
        throw ConfigError("n grid is empty");
    for (int v : n)
        if (v < 2)
            throw ConfigError("every n must be at least 2");
    const int min_p = experiment == Experiment::diag ? 1 : 2;
    for (int v : p)
        if (v < min_p)
            throw ConfigError("every p must be at least " + std::to_string(min_p));
    for (int v : s)
        if (v < 1)
            throw ConfigError("every s must be at least 1");
    if (experiment == Experiment::sparse) {
        const bool any = std::any_of(s.begin(), s.end(), [this](int sv) {
            return std::any_of(p.begin(), p.end(), [sv](int pv) { return sv <= pv; });
        });
        if (!any)
            throw ConfigError("no (s, p) combination with s <= p");
        if (s_hat)
            for (int pv : p)
                if (*s_hat > pv)
                    throw ConfigError("shat exceeds p");
    }
}

double estimation_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star,
                        bool sign_invariant)
{
    if (beta_hat.size() != beta_star.size())
        throw ConfigError("estimation_error: dimension mismatch");
    if (std::abs(beta_hat.norm() - 1.0) > 1e-6 || std::abs(beta_star.norm() - 1.0) > 1e-6)
        throw ConfigError("estimation_error: inputs must be unit vectors");
    const double direct = (beta_hat - beta_star).norm();
    if (!sign_invariant)
        return direct;
    return std::min(direct, (beta_hat + beta_star).norm());
}

MomentKind resolve_kind(const LinkModel& model, EstimatorChoice choice, int quad_order)
{
    switch (choice) {
    case EstimatorChoice::difference: return MomentKind::difference;
    case EstimatorChoice::sum: return MomentKind::sum;
    case EstimatorChoice::automatic: break;
    }
    return select_kind(model, quad_order);
}

namespace {

struct GridPoint {
    double noise = 0.0;
    int n = 0;
    int p = 0;
    std::optional<int> s;
};

std::vector<GridPoint> grid_points(const RunConfig& cfg)
{
    std::vector<GridPoint> points;
    for (double noise : cfg.noise) {
        switch (cfg.experiment) {
        case Experiment::eigs:
        case Experiment::lowdim:
            for (int p : cfg.p)
                for (int n : cfg.n)
                    points.push_back({noise, n, p, std::nullopt});
            break;
        case Experiment::sparse:
            for (int s : cfg.s)
                for (int p : cfg.p)
                    if (s <= p)
                        for (int n : cfg.n)
                            points.push_back({noise, n, p, s});
            break;
        case Experiment::diag:
            break;
        }
    }
    return points;
}

// Keyed by the point's own parameters so that editing the grid leaves the
// draws of the remaining points untouched.
Rng trial_stream(const RunConfig& cfg, const GridPoint& pt, int trial)
{
    return derive_stream(cfg.seed, {static_cast<std::uint64_t>(cfg.experiment),
                                    std::bit_cast<std::uint64_t>(pt.noise),
                                    static_cast<std::uint64_t>(pt.n),
                                    static_cast<std::uint64_t>(pt.p),
                                    static_cast<std::uint64_t>(pt.s.value_or(0)),
                                    static_cast<std::uint64_t>(trial)});
}

template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body)
{
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, count); ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                        next = count;
                    }
                }
            });
    }
    if (failure)
        std::rethrow_exception(failure);
}

ExperimentRow base_row(const RunConfig& cfg, const LinkModel& model, const GridPoint& pt,
                       int trial)
{
    ExperimentRow row;
    row.experiment = to_string(cfg.experiment);
    row.model = model.tag();
    row.param_name = model.param_name();
    row.param_value = pt.noise;
    row.n = pt.n;
    row.p = pt.p;
    row.s = pt.s;
    row.trial = trial;
    return row;
}

ExperimentRow eigs_trial(const RunConfig& cfg, const GridPoint& pt, int trial)
{
    const LinkModel model = make_model(cfg.model, pt.noise, cfg.zeta);
    Rng rng = trial_stream(cfg, pt, trial);
    const GroundTruth truth = sample_beta_dense(pt.p, rng);
    const Dataset data = generate_dataset(model, truth, pt.n, rng);
    const MomentMatrix m = build_moment(data, resolve_kind(model, cfg.estimator, cfg.quad_order));
    const auto top = top_two_eigs(m.entries);

    ExperimentRow row = base_row(cfg, model, pt, trial);
    row.lambda1_over4 = top.lambda1 / 4.0;
    row.lambda2_over4 = top.lambda2 / 4.0;
    return row;
}

void fill_errors(ExperimentRow& row, const LinkModel& model, const RecoveryReport& rep,
                 const GroundTruth& truth)
{
    const bool even_link = std::holds_alternative<OneBitPR>(model.variant());
    row.err_signfree = estimation_error(rep.beta_hat, truth.beta_star, true);
    row.err = even_link ? *row.err_signfree : estimation_error(rep.beta_hat, truth.beta_star, false);
    row.iters = rep.iterations;
    row.converged = rep.converged;
}

ExperimentRow lowdim_trial(const RunConfig& cfg, const GridPoint& pt, int trial)
{
    const LinkModel model = make_model(cfg.model, pt.noise, cfg.zeta);
    Rng rng = trial_stream(cfg, pt, trial);
    const GroundTruth truth = sample_beta_dense(pt.p, rng);
    const Dataset data = generate_dataset(model, truth, pt.n, rng);
    const MomentMatrix m = build_moment(data, resolve_kind(model, cfg.estimator, cfg.quad_order));
    const Eigen::VectorXd beta0 = sample_beta_dense(pt.p, rng).beta_star;
    const RecoveryReport rep = power_method(m.entries, beta0, cfg.t_max, cfg.tol);

    ExperimentRow row = base_row(cfg, model, pt, trial);
    row.abscissa = std::sqrt(double(pt.p) / double(pt.n));
    fill_errors(row, model, rep, truth);
    return row;
}

}  // namespace

double sparse_rho(const RunConfig& cfg, const LinkModel& model, MomentKind kind, int n, int p)
{
    const MomentSummary mom = moments(model, cfg.quad_order);
    const double base = kind == MomentKind::difference ? 1.0 - mom.mu0 * mom.mu0
                                                       : 1.0 + mom.mu0 * mom.mu0;
    return default_rho(n, p, cfg.rho_const * (std::abs(mom.phi) + base));
}

namespace {

ExperimentRow sparse_trial(const RunConfig& cfg, const GridPoint& pt, int trial)
{
    const LinkModel model = make_model(cfg.model, pt.noise, cfg.zeta);
    Rng rng = trial_stream(cfg, pt, trial);
    const GroundTruth truth = sample_beta_sparse(pt.p, *pt.s, rng);
    const Dataset data = generate_dataset(model, truth, pt.n, rng);
    const MomentKind kind = resolve_kind(model, cfg.estimator, cfg.quad_order);

    SparseConfig sc;
    sc.rho = sparse_rho(cfg, model, kind, pt.n, pt.p);
    sc.s_hat = cfg.s_hat.value_or(std::min(2 * *pt.s, pt.p));
    sc.t_max = cfg.t_max;
    sc.tol = cfg.tol;
    sc.admm_tol = cfg.admm_tol;
    sc.admm_max_iter = cfg.admm_max_iter;
    const SparseReport rep = sparse_recover(data, sc, kind);

    ExperimentRow row = base_row(cfg, model, pt, trial);
    row.abscissa = std::sqrt(double(*pt.s) * std::log(double(pt.p)) / double(pt.n));
    fill_errors(row, model, rep.recovery, truth);
    return row;
}

std::vector<ExperimentRow> run_grid(const RunConfig& cfg,
                                    ExperimentRow (*trial_fn)(const RunConfig&, const GridPoint&, int))
{
    const auto points = grid_points(cfg);
    const auto trials = static_cast<std::size_t>(cfg.trials);
    std::vector<ExperimentRow> rows(points.size() * trials);
    parallel_for(rows.size(), cfg.threads, [&](std::size_t task) {
        rows[task] = trial_fn(cfg, points[task / trials], static_cast<int>(task % trials));
    });
    return rows;
}

RunConfig expect(const RunConfig& cfg, Experiment e)
{
    if (cfg.experiment != e)
        throw ConfigError(std::string("config is for experiment '") + to_string(cfg.experiment)
                          + "', expected '" + to_string(e) + "'");
    RunConfig resolved = cfg;
    resolved.resolve();
    return resolved;
}

}  // namespace

TrialData first_trial_data(const RunConfig& cfg_in)
{
    RunConfig cfg = cfg_in;
    cfg.resolve();
    const auto points = grid_points(cfg);
    if (points.empty())
        throw ConfigError("experiment has no grid points");
    const GridPoint& pt = points.front();
    const LinkModel model = make_model(cfg.model, pt.noise, cfg.zeta);
    Rng rng = trial_stream(cfg, pt, 0);
    TrialData out;
    out.truth = pt.s ? sample_beta_sparse(pt.p, *pt.s, rng) : sample_beta_dense(pt.p, rng);
    out.data = generate_dataset(model, out.truth, pt.n, rng);
    out.moment = build_moment(out.data, resolve_kind(model, cfg.estimator, cfg.quad_order));
    return out;
}

std::vector<ExperimentRow> run_eigenstructure(const RunConfig& cfg)
{
    return run_grid(expect(cfg, Experiment::eigs), eigs_trial);
}

std::vector<ExperimentRow> run_lowdim(const RunConfig& cfg)
{
    return run_grid(expect(cfg, Experiment::lowdim), lowdim_trial);
}

std::vector<ExperimentRow> run_sparse(const RunConfig& cfg)
{
    return run_grid(expect(cfg, Experiment::sparse), sparse_trial);
}

std::vector<ExperimentRow> run_experiment(const RunConfig& cfg)
{
    switch (cfg.experiment) {
    case Experiment::eigs: return run_eigenstructure(cfg);
    case Experiment::lowdim: return run_lowdim(cfg);
    case Experiment::sparse: return run_sparse(cfg);
    case Experiment::diag: break;
    }
    throw ConfigError("diag produces a report, not CSV rows");
}

void run_diag(const RunConfig& cfg_in, std::ostream& os)
{
    const RunConfig cfg = expect(cfg_in, Experiment::diag);
    for (double noise : cfg.noise) {
        const LinkModel model = make_model(cfg.model, noise, cfg.zeta);
        const MomentSummary mom = moments(model, cfg.quad_order);
        os << "model=" << model.tag() << ' ' << model.param_name() << '=' << format_double(noise);
        if (model.tag() == "flr")
            os << " zeta=" << format_double(cfg.zeta);
        os << '\n'
           << "  method=" << (mom.method == MomentMethod::closed_form ? "closed_form" : "quadrature")
           << '\n'
           << "  mu0=" << format_double(mom.mu0) << " mu1=" << format_double(mom.mu1)
           << " mu2=" << format_double(mom.mu2) << " phi=" << format_double(mom.phi) << '\n'
           << "  theta_m=" << format_double(theta_median()) << '\n';
        if (!(mom.phi > 0.0)) {
            os << "  advisory: phi <= 0, beta* is not the leading eigenvector of M; "
                  "use sum-type estimator M'\n";
            continue;
        }
        if (mom.phi < 0.01)
            os << "  warning: phi near 0, kappa near 1; expect a slow rate\n";
        for (int p : cfg.p) {
            if (cfg.s.empty()) {
                const auto d = theory_diagnostics(model, p, std::nullopt, cfg.quad_order);
                os << "  p=" << p << " gamma=" << format_double(d.gamma)
                   << " xi=" << format_double(d.xi) << " kappa=" << format_double(d.kappa)
                   << " s_hat_multiplier=" << format_double(d.s_hat_multiplier)
                   << " dense_rate_factor=" << format_double(d.dense_rate_factor) << '\n';
                continue;
            }
            for (int s : cfg.s) {
                if (s > p)
                    continue;
                const auto d = theory_diagnostics(model, p, s, cfg.quad_order);
                os << "  p=" << p << " s=" << s << " gamma=" << format_double(d.gamma)
                   << " xi=" << format_double(d.xi) << " kappa=" << format_double(d.kappa)
                   << " n_min(as-printed,C=1)=" << format_double(*d.n_min)
                   << " s_hat_multiplier=" << format_double(d.s_hat_multiplier)
                   << " sparse_rate_factor=" << format_double(d.sparse_rate_factor) << '\n';
            }
        }
    }
}

namespace {

template <typename T>
void put(std::ostream& os, const std::optional<T>& v)
{
    os << ',';
    if (!v)
        return;
    if constexpr (std::is_same_v<T, double>)
        os << format_double(*v);
    else if constexpr (std::is_same_v<T, bool>)
        os << (*v ? 1 : 0);
    else
        os << *v;
}

}  // namespace

void write_rows_csv(std::ostream& os, const std::vector<ExperimentRow>& rows)
{
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.experiment << ',' << r.model << ',' << r.param_name << ','
           << format_double(r.param_value) << ',' << r.n << ',' << r.p;
        put(os, r.s);
        os << ',' << r.trial;
        put(os, r.abscissa);
        put(os, r.lambda1_over4);
        put(os, r.lambda2_over4);
        put(os, r.err);
        put(os, r.err_signfree);
        put(os, r.iters);
        put(os, r.converged);
        os << '\n';
    }
}

namespace {

double median_of(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const auto mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

std::vector<GridSummary> summarize(const std::vector<ExperimentRow>& rows)
{
    using Key = std::tuple<double, int, int, int>;
    std::map<Key, std::vector<const ExperimentRow*>> groups;
    std::vector<Key> order;
    for (const auto& r : rows) {
        Key key{r.param_value, r.s.value_or(0), r.p, r.n};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted)
            order.push_back(key);
        it->second.push_back(&r);
    }

    std::vector<GridSummary> out;
    for (const auto& key : order) {
        const auto& members = groups[key];
        const ExperimentRow& first = *members.front();
        GridSummary g;
        g.param_name = first.param_name;
        g.param_value = first.param_value;
        g.n = first.n;
        g.p = first.p;
        g.s = first.s;
        g.abscissa = first.abscissa;
        g.trials = static_cast<int>(members.size());
        std::vector<double> values;
        double l1 = 0.0, l2 = 0.0;
        for (const auto* r : members) {
            if (r->err_signfree)
                values.push_back(*r->err_signfree);
            else if (r->lambda1_over4 && r->lambda2_over4)
                values.push_back(*r->lambda1_over4 - *r->lambda2_over4);
            l1 += r->lambda1_over4.value_or(0.0);
            l2 += r->lambda2_over4.value_or(0.0);
        }
        g.median_err = median_of(values);
        g.mean_err = values.empty() ? 0.0
                                    : std::accumulate(values.begin(), values.end(), 0.0)
                                          / double(values.size());
        g.mean_lambda1_over4 = l1 / g.trials;
        g.mean_lambda2_over4 = l2 / g.trials;
        out.push_back(g);
    }
    return out;
}

void write_summary(std::ostream& os, const std::vector<GridSummary>& summary)
{
    os << "param_name,param_value,n,p,s,abscissa,trials,median,mean,mean_lambda1_over4,"
          "mean_lambda2_over4\n";
    for (const auto& g : summary) {
        os << g.param_name << ',' << format_double(g.param_value) << ',' << g.n << ',' << g.p
           << ',';
        if (g.s)
            os << *g.s;
        os << ',';
        if (g.abscissa)
            os << format_double(*g.abscissa);
        os << ',' << g.trials << ',' << format_double(g.median_err) << ','
           << format_double(g.mean_err) << ',' << format_double(g.mean_lambda1_over4) << ','
           << format_double(g.mean_lambda2_over4) << '\n';
    }
}

}  // namespace onebit
