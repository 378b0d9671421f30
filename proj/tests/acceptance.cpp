// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// and wall time. Exit status is nonzero if any criterion fails.

#include "onebit/errors.hpp"
#include "onebit/harness.hpp"
#include "onebit/link_models.hpp"
#include "onebit/moment_estimator.hpp"
#include "onebit/sparse_recovery.hpp"
#include "onebit/spectral.hpp"
#include "onebit/synth.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace onebit;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!detail.empty())
            detail += "; ";
        detail += what;
        if (!ok) {
            detail += " [miss]";
            pass = false;
        }
    }
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

int worker_threads()
{
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Median sign-free error per (p, n) cell.
std::map<std::pair<int, int>, double> cell_medians(const std::vector<ExperimentRow>& rows)
{
    std::map<std::pair<int, int>, std::vector<double>> cells;
    for (const auto& r : rows)
        cells[{r.p, r.n}].push_back(*r.err_signfree);
    std::map<std::pair<int, int>, double> out;
    for (auto& [key, v] : cells)
        out[key] = median(v);
    return out;
}

// Least-squares fit y = a + b x; returns {b, R^2}.
std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = double(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double b = sxy / sxx;
    return {b, sxy * sxy / (sxx * syy)};
}

double op_norm(const Eigen::MatrixXd& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd random_symmetric(int p, Rng& rng, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd g(p, p);
    for (Eigen::Index i = 0; i < g.size(); ++i)
        g.data()[i] = normal(rng);
    return (g + g.transpose()) / 2;
}

// Water level of the Fantope projection by bisection on
// h(g) = sum clamp(l_i - g, 0, 1) = 1.
double bisection_water_level(const Eigen::VectorXd& lambda)
{
    auto h = [&](double g) {
        double s = 0;
        for (double l : lambda)
            s += std::min(std::max(l - g, 0.0), 1.0);
        return s;
    };
    double lo = lambda.minCoeff() - 1.0, hi = lambda.maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Composite Simpson of int_a^b g(z) phi(z) dz.
template <typename G>
double simpson(G g, double a, double b, int panels = 100000)
{
    const double h = (b - a) / panels;
    auto w = [&](double z) {
        return g(z) * std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi);
    };
    double acc = w(a) + w(b);
    for (int i = 1; i < panels; ++i)
        acc += (i % 2 ? 4.0 : 2.0) * w(a + i * h);
    return acc * h / 3.0;
}

Verdict eigenstructure()
{
    Verdict v;
    RunConfig cfg;
    cfg.experiment = Experiment::eigs;
    cfg.model = "flr";
    cfg.noise = {0.0, 0.1, 0.2, 0.3, 0.4};
    cfg.n = {3000};
    cfg.p = {20};
    cfg.trials = 10;
    cfg.threads = worker_threads();
    const auto summary = summarize(run_experiment(cfg));
    double prev_gap = 1e300;
    for (const auto& g : summary) {
        const double phi = moments(make_model("flr", g.param_value)).phi;
        const double gap = g.mean_lambda1_over4 - g.mean_lambda2_over4;
        const std::string at = "pe=" + fmt("%.1f", g.param_value);
        v.require(g.mean_lambda2_over4 >= 0.9 && g.mean_lambda2_over4 <= 1.1,
                  at + " l2/4=" + fmt("%.3f", g.mean_lambda2_over4));
        v.require(std::abs(gap - phi) <= 0.25 * phi,
                  at + " gap=" + fmt("%.4f", gap) + " phi=" + fmt("%.4f", phi));
        v.require(gap < prev_gap, at + " gap decreasing");
        prev_gap = gap;
    }
    return v;
}

Verdict concentration()
{
    Verdict v;
    struct Case {
        const char* tag;
        double noise;
    };
    const Case cases[] = {{"flr", 0.1}, {"cs", std::sqrt(0.1)}, {"pr", 1.0},
                          {"pr", theta_median() / 2}};
    std::uint64_t idx = 0;
    for (const auto& c : cases) {
        const LinkModel model = make_model(c.tag, c.noise);
        Rng rng = derive_stream(20160521, {2, idx++});
        const GroundTruth truth = sample_beta_dense(10, rng);
        const Dataset data = generate_dataset(model, truth, 50000, rng);
        const MomentKind kind = select_kind(model);
        const Eigen::MatrixXd em = expected_moment(model, truth.beta_star, kind).entries;
        const double ratio = op_norm(build_moment(data, kind).entries - em) / op_norm(em);
        v.require(ratio <= 0.1, std::string(c.tag) + "(" + fmt("%.3g", c.noise) + ","
                                    + to_string(kind) + ") ratio=" + fmt("%.4f", ratio));
    }
    return v;
}

Verdict sign_flip()
{
    Verdict v;
    const double tm = theta_median();
    const double below = moments(LinkModel(OneBitPR{tm - 1e-3})).phi;
    const double above = moments(LinkModel(OneBitPR{tm + 1e-3})).phi;
    v.require(below < 0 && above > 0, "phi(theta_m -+ 1e-3)=" + fmt("%.2e", below) + ","
                                          + fmt("%.2e", above));
    for (double theta : {tm / 2, 1.0}) {
        RunConfig cfg;
        cfg.experiment = Experiment::lowdim;
        cfg.model = "pr";
        cfg.noise = {theta};
        cfg.n = {20000};
        cfg.p = {10};
        cfg.trials = 20;
        cfg.threads = worker_threads();
        const double med = cell_medians(run_experiment(cfg)).begin()->second;
        v.require(med < 0.15, "theta=" + fmt("%.4f", theta) + " "
                                  + to_string(select_kind(make_model("pr", theta)))
                                  + " median=" + fmt("%.4f", med));
    }
    return v;
}

Verdict lowdim_rate()
{
    Verdict v;
    for (const char* tag : {"flr", "cs", "pr"}) {
        RunConfig cfg;
        cfg.experiment = Experiment::lowdim;
        cfg.model = tag;
        cfg.trials = 100;
        cfg.threads = worker_threads();
        // Only the cells used below: the slope line p = 20 and the
        // p/n = 1/50 diagonal.
        RunConfig slope_cfg = cfg;
        slope_cfg.p = {20};
        slope_cfg.n = {500, 1000, 2000, 8000};
        auto med = cell_medians(run_experiment(slope_cfg));
        for (auto [p, n] : {std::pair{10, 500}, std::pair{40, 2000}}) {
            RunConfig one = cfg;
            one.p = {p};
            one.n = {n};
            med.merge(cell_medians(run_experiment(one)));
        }

        std::vector<double> x, y;
        for (int n : {500, 2000, 8000}) {
            x.push_back(std::log(double(n)));
            y.push_back(std::log(med.at({20, n})));
        }
        const double slope = ols(x, y).first;
        v.require(std::abs(slope + 0.5) <= 0.1, std::string(tag) + " slope=" + fmt("%.3f", slope));

        const double c[] = {med.at({10, 500}), med.at({20, 1000}), med.at({40, 2000})};
        const double mean = (c[0] + c[1] + c[2]) / 3;
        double spread = 0;
        for (double e : c)
            spread = std::max(spread, std::abs(e - mean) / mean);
        v.require(spread <= 0.25, std::string(tag) + " collapse=" + fmt("%.3f", spread));
    }
    return v;
}

Verdict sparse_rate()
{
    Verdict v;
    RunConfig cfg;
    cfg.experiment = Experiment::sparse;
    cfg.model = "cs";
    cfg.noise = {0.0};
    cfg.n = {1000, 4000};
    cfg.trials = 50;
    cfg.threads = worker_threads();
    std::vector<double> x, y;
    for (auto [s, p] : {std::pair{5, 100}, std::pair{5, 200}, std::pair{10, 200}}) {
        RunConfig one = cfg;
        one.s = {s};
        one.p = {p};
        for (const auto& g : summarize(run_experiment(one))) {
            x.push_back(*g.abscissa);
            y.push_back(g.median_err);
        }
    }
    const auto [b, r2] = ols(x, y);
    v.require(r2 >= 0.9, "R2=" + fmt("%.4f", r2) + " slope=" + fmt("%.3f", b));

    double worst = 0;
    for (std::uint64_t t = 0; t < 20; ++t) {
        Rng rng = derive_stream(20160521, {5, t});
        const GroundTruth truth = sample_beta_sparse(20, 4, rng);
        const Dataset data = generate_dataset(LinkModel(OneBitCS{0.0}), truth, 2000, rng);
        SparseConfig sc;
        sc.rho = 0.0;
        sc.s_hat = 20;
        const SparseReport rep = sparse_recover(data, sc);
        const RecoveryReport pm =
            power_method(second_moment(data).entries, sample_beta_dense(20, rng).beta_star);
        worst = std::max(worst, aligned_distance(rep.recovery.beta_hat, pm.beta_hat));
    }
    v.require(worst <= 1e-6, "degenerate max diff=" + fmt("%.2e", worst));
    return v;
}

Verdict fantope()
{
    Verdict v;
    Rng rng = derive_stream(20160521, {6});
    double oracle = 0, idem = 0, comm = 0, kkt = -1e300, feas = 0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::MatrixXd a = random_symmetric(8, rng, 1.0 + rep % 5);
        const Eigen::MatrixXd pi = fantope_project(a);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        const double g = bisection_water_level(es.eigenvalues());
        const Eigen::VectorXd w = (es.eigenvalues().array() - g).max(0.0).min(1.0);
        const Eigen::MatrixXd ref = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
        oracle = std::max(oracle, (pi - ref).cwiseAbs().maxCoeff());

        idem = std::max(idem, (fantope_project(pi) - pi).cwiseAbs().maxCoeff());
        comm = std::max(comm, (pi * a - a * pi).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pe(pi, Eigen::EigenvaluesOnly);
        feas = std::max({feas, std::abs(pi.trace() - 1.0), -pe.eigenvalues().minCoeff(),
                         pe.eigenvalues().maxCoeff() - 1.0});

        // Optimality: <A - Pi, F - Pi> <= 0 for Fantope points F.
        for (int k = 0; k < 20; ++k) {
            const Eigen::MatrixXd q =
                Eigen::HouseholderQR<Eigen::MatrixXd>(random_symmetric(8, rng)).householderQ();
            Eigen::VectorXd lw(8);
            for (int i = 0; i < 8; ++i)
                lw(i) = -std::log(unif(rng) + 1e-300);
            lw /= lw.sum();
            const Eigen::MatrixXd f = q * lw.asDiagonal() * q.transpose();
            kkt = std::max(kkt, ((a - pi).cwiseProduct(f - pi)).sum());
        }
    }
    v.require(oracle <= 1e-8, "oracle=" + fmt("%.2e", oracle));
    v.require(idem <= 1e-10, "idempotence=" + fmt("%.2e", idem));
    v.require(comm <= 1e-10 && feas <= 1e-10 && kkt <= 1e-8,
              "KKT commute=" + fmt("%.2e", comm) + " feas=" + fmt("%.2e", feas)
                  + " ineq=" + fmt("%.2e", kkt));
    return v;
}

Verdict power_contract()
{
    Verdict v;
    Rng rng = derive_stream(20160521, {7});
    bool monotone = true;
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::MatrixXd g(20, 20);
        for (Eigen::Index i = 0; i < g.size(); ++i)
            g.data()[i] = normal(rng);
        const Eigen::MatrixXd m = g * g.transpose() / 20;
        const RecoveryReport r = power_method(m, sample_beta_dense(20, rng).beta_star, 200, 0.0);
        for (std::size_t t = 1; t < r.rayleigh_trace.size(); ++t)
            monotone = monotone && r.rayleigh_trace[t] >= r.rayleigh_trace[t - 1] * (1 - 1e-10);
    }
    v.require(monotone, "Rayleigh monotone on 50 PSD matrices");

    const Eigen::Matrix3d m = Eigen::Vector3d(3, 1, 1).asDiagonal();
    const Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();
    double worst = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::VectorXd b0 = sample_beta_dense(3, rng).beta_star;
        const double alpha = std::abs(b0.dot(e1));
        const double c = std::sqrt(1 - alpha * alpha) / alpha;
        power_method(m, b0, 30, 0.0, [&](int t, const Eigen::VectorXd& b) {
            const double bound = c * std::pow(1.0 / 3.0, t);
            worst = std::max(worst, aligned_distance(e1, b) - bound * (1 + 1e-12) - 1e-15);
        });
    }
    v.require(worst <= 0, "diag(3,1,1) envelope excess=" + fmt("%.2e", std::max(worst, 0.0)));
    return v;
}

Verdict determinism()
{
    Verdict v;
    auto csv = [](const RunConfig& cfg) {
        std::ostringstream os;
        write_rows_csv(os, run_experiment(cfg));
        return os.str();
    };
    RunConfig eigs;
    eigs.experiment = Experiment::eigs;
    eigs.model = "flr";
    eigs.n = {600};
    eigs.p = {8};
    eigs.trials = 3;
    RunConfig low;
    low.experiment = Experiment::lowdim;
    low.model = "pr";
    low.n = {500, 1000};
    low.p = {5, 10};
    low.trials = 5;
    RunConfig sp;
    sp.experiment = Experiment::sparse;
    sp.n = {500};
    sp.p = {30};
    sp.s = {3};
    sp.trials = 4;
    for (RunConfig cfg : {eigs, low, sp}) {
        const std::string a = csv(cfg);
        const std::string b = csv(cfg);
        cfg.threads = 4;
        const std::string c = csv(cfg);
        v.require(a == b && a == c, std::string(to_string(cfg.experiment)) + " rerun/parallel "
                                        + (a == b && a == c ? "identical" : "differ"));
    }
    return v;
}

Verdict moment_checks()
{
    Verdict v;
    double flr = 0;
    for (double zeta : {0.0, 0.7})
        for (double pe : {0.0, 0.1, 0.2, 0.3, 0.4}) {
            const LinkModel model(FlippedLogistic{zeta, pe});
            const MomentSummary lo = moments(model, 64), hi = moments(model, 200);
            flr = std::max({flr, std::abs(lo.mu0 - hi.mu0), std::abs(lo.mu1 - hi.mu1),
                            std::abs(lo.mu2 - hi.mu2), std::abs(lo.phi - hi.phi)});
        }
    v.require(flr <= 1e-6, "FLR order 64 vs 200 max diff=" + fmt("%.2e", flr));

    double cs = 0;
    for (double sigma : {0.0, 0.25, 0.5, 1.0, 2.0}) {
        auto g = [sigma](double z) {
            return (sigma == 0 ? (z >= 0 ? 1.0 : -1.0) : std::erf(z / (sigma * std::numbers::sqrt2))) * z;
        };
        // Even integrand: twice the half-line, split at 6.
        const double quad = 2.0 * (simpson(g, 0.0, 6.0) + simpson(g, 6.0, 12.0));
        cs = std::max(cs, std::abs(moments(LinkModel(OneBitCS{sigma})).mu1 - quad));
    }
    v.require(cs <= 1e-8, "CS mu1 vs split quadrature max diff=" + fmt("%.2e", cs));

    double pr = 0;
    for (double theta : {0.3, 0.6745, 1.0, 1.5}) {
        // f = -1 on |z| < theta and +1 beyond: integrate each piece with the
        // sign pulled out so no panel straddles the jump.
        auto part = [&](auto g) {
            return 2.0 * (simpson(g, theta, 12.0) - simpson(g, 0.0, theta));
        };
        const MomentSummary m = moments(LinkModel(OneBitPR{theta}));
        pr = std::max({pr, std::abs(m.mu0 - part([](double) { return 1.0; })),
                       std::abs(m.mu2 - part([](double z) { return z * z; }))});
    }
    v.require(pr <= 1e-6, "PR closed form vs split quadrature max diff=" + fmt("%.2e", pr));
    return v;
}

}  // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Verdict()> run;
        double budget_s;
    };
    const Criterion criteria[] = {
        {"eigenstructure", eigenstructure, 60},
        {"concentration", concentration, 30},
        {"phi sign flip", sign_flip, 0},
        {"low-dimensional rate", lowdim_rate, 180},
        {"sparse rate", sparse_rate, 300},
        {"fantope projection", fantope, 0},
        {"power method contract", power_contract, 0},
        {"determinism", determinism, 0},
        {"moment cross-checks", moment_checks, 0},
    };
    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0)
            v.require(secs < c.budget_s, "runtime budget " + fmt("%.0f s", c.budget_s));
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", index,
                    c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d of %d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
