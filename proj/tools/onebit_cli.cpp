// onebit: spectral recovery of a unit vector from one-bit observations.
//
//   onebit eigs   --model flr --pe 0,0.1,0.2,0.3,0.4
//   onebit lowdim --model cs --p 10,20 --n 1000,4000 --trials 100 --out low.csv
//   onebit sparse --model pr --theta 1 --s 5 --p 100 --n 2000
//   onebit diag   --model pr --theta 0.4
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "onebit/csv.hpp"
#include "onebit/errors.hpp"
#include "onebit/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using onebit::ConfigError;
using onebit::RunConfig;
using nlohmann::json;

template <typename T>
std::vector<T> parse_grid(const std::string& text, const char* flag)
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        std::size_t used = 0;
        T value{};
        try {
            if constexpr (std::is_same_v<T, int>)
                value = std::stoi(item, &used);
            else
                value = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size())
            throw ConfigError(std::string("--") + flag + ": cannot parse '" + item + "'");
        out.push_back(value);
    }
    if (out.empty())
        throw ConfigError(std::string("--") + flag + ": empty grid");
    return out;
}

// JSON values may be numbers, arrays of numbers or comma-separated strings.
template <typename T>
std::vector<T> json_grid(const json& v, const char* key)
{
    if (v.is_string())
        return parse_grid<T>(v.get<std::string>(), key);
    if (v.is_number())
        return {v.get<T>()};
    if (v.is_array())
        return v.get<std::vector<T>>();
    throw ConfigError(std::string("config key '") + key + "' must be a number, array or string");
}

onebit::EstimatorChoice parse_estimator(const std::string& s)
{
    if (s == "auto")
        return onebit::EstimatorChoice::automatic;
    if (s == "diff" || s == "difference")
        return onebit::EstimatorChoice::difference;
    if (s == "sum")
        return onebit::EstimatorChoice::sum;
    throw ConfigError("--estimator must be auto, diff or sum");
}

struct Flags {
    std::string model, pe, sigma, theta, n, p, s, estimator, out, config, summary, dump;
    double zeta = 0.0, rho_const = 1.0, admm_tol = 1e-6, tol = 1e-10;
    int trials = 0, tmax = 500, shat = 0, threads = 1, admm_max_iter = 2000, quad_order = 64;
    std::uint64_t seed = 0;
};

void apply_json(RunConfig& cfg, const json& j)
{
    static const char* const known[] = {"model", "pe", "sigma", "theta", "zeta", "n", "p", "s",
                                        "trials", "seed", "tmax", "tol", "rho_const", "shat",
                                        "admm_tol", "admm_max_iter", "estimator", "threads",
                                        "quad_order", "out"};
    if (!j.is_object())
        throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ConfigError("unknown config key '" + key + "'");
    }
    if (j.contains("model"))
        cfg.model = j["model"].get<std::string>();
    const char* noise_key = cfg.model == "flr" ? "pe" : cfg.model == "cs" ? "sigma" : "theta";
    if (j.contains(noise_key))
        cfg.noise = json_grid<double>(j[noise_key], noise_key);
    if (j.contains("zeta"))
        cfg.zeta = j["zeta"].get<double>();
    if (j.contains("n"))
        cfg.n = json_grid<int>(j["n"], "n");
    if (j.contains("p"))
        cfg.p = json_grid<int>(j["p"], "p");
    if (j.contains("s"))
        cfg.s = json_grid<int>(j["s"], "s");
    if (j.contains("trials"))
        cfg.trials = j["trials"].get<int>();
    if (j.contains("seed"))
        cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tmax"))
        cfg.t_max = j["tmax"].get<int>();
    if (j.contains("tol"))
        cfg.tol = j["tol"].get<double>();
    if (j.contains("rho_const"))
        cfg.rho_const = j["rho_const"].get<double>();
    if (j.contains("shat"))
        cfg.s_hat = j["shat"].get<int>();
    if (j.contains("admm_tol"))
        cfg.admm_tol = j["admm_tol"].get<double>();
    if (j.contains("admm_max_iter"))
        cfg.admm_max_iter = j["admm_max_iter"].get<int>();
    if (j.contains("estimator"))
        cfg.estimator = parse_estimator(j["estimator"].get<std::string>());
    if (j.contains("threads"))
        cfg.threads = j["threads"].get<int>();
    if (j.contains("quad_order"))
        cfg.quad_order = j["quad_order"].get<int>();
    if (j.contains("out"))
        cfg.out = j["out"].get<std::string>();
}

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--model", f.model, "link model: flr, cs or pr");
    sub->add_option("--pe", f.pe, "flip probability grid (flr)");
    sub->add_option("--sigma", f.sigma, "noise standard deviation grid (cs)");
    sub->add_option("--theta", f.theta, "threshold grid (pr)");
    sub->add_option("--zeta", f.zeta, "logistic intercept (flr)");
    sub->add_option("--n", f.n, "sample size grid, comma separated");
    sub->add_option("--p", f.p, "dimension grid, comma separated");
    sub->add_option("--s", f.s, "sparsity grid, comma separated");
    sub->add_option("--trials", f.trials, "trials per grid point");
    sub->add_option("--seed", f.seed, "64-bit master seed");
    sub->add_option("--tmax", f.tmax, "power iterations cap");
    sub->add_option("--tol", f.tol, "power iteration step tolerance (0: fixed iterations)");
    sub->add_option("--rho-const", f.rho_const, "constant in the Fantope penalty");
    sub->add_option("--shat", f.shat, "truncation level (default 2s)");
    sub->add_option("--admm-tol", f.admm_tol, "ADMM residual tolerance (scaled by p)");
    sub->add_option("--admm-max-iter", f.admm_max_iter, "ADMM iteration cap");
    sub->add_option("--estimator", f.estimator, "auto, diff or sum");
    sub->add_option("--quad-order", f.quad_order, "Gauss-Hermite order for smooth links");
    sub->add_option("--threads", f.threads, "worker threads (output is identical)");
    sub->add_option("--out", f.out, "CSV output file (default stdout)");
    sub->add_option("--summary", f.summary, "per grid point medians/means CSV (default stderr)");
    sub->add_option("--dump", f.dump,
                    "write PREFIX_data.csv and PREFIX_moment.csv for the first trial");
    sub->add_option("--config", f.config, "JSON file mirroring the flags; flags win");
}

bool given(const CLI::App* sub, const char* name) { return sub->count(name) > 0; }

RunConfig build_config(const CLI::App* sub, const Flags& f, onebit::Experiment experiment)
{
    RunConfig cfg;
    cfg.experiment = experiment;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in)
            throw ConfigError("cannot open config file '" + f.config + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config file: ") + e.what());
        }
        try {
            apply_json(cfg, j);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config file: ") + e.what());
        }
    }
    if (given(sub, "--model"))
        cfg.model = f.model;
    onebit::default_noise(cfg.model);
    const std::string& noise_flag = cfg.model == "flr" ? f.pe : cfg.model == "cs" ? f.sigma : f.theta;
    const char* noise_name = cfg.model == "flr" ? "pe" : cfg.model == "cs" ? "sigma" : "theta";
    if (given(sub, (std::string("--") + noise_name).c_str()))
        cfg.noise = parse_grid<double>(noise_flag, noise_name);
    if (given(sub, "--zeta"))
        cfg.zeta = f.zeta;
    if (given(sub, "--n"))
        cfg.n = parse_grid<int>(f.n, "n");
    if (given(sub, "--p"))
        cfg.p = parse_grid<int>(f.p, "p");
    if (given(sub, "--s"))
        cfg.s = parse_grid<int>(f.s, "s");
    if (given(sub, "--trials"))
        cfg.trials = f.trials;
    if (given(sub, "--seed"))
        cfg.seed = f.seed;
    if (given(sub, "--tmax"))
        cfg.t_max = f.tmax;
    if (given(sub, "--tol"))
        cfg.tol = f.tol;
    if (given(sub, "--rho-const"))
        cfg.rho_const = f.rho_const;
    if (given(sub, "--shat"))
        cfg.s_hat = f.shat;
    if (given(sub, "--admm-tol"))
        cfg.admm_tol = f.admm_tol;
    if (given(sub, "--admm-max-iter"))
        cfg.admm_max_iter = f.admm_max_iter;
    if (given(sub, "--estimator"))
        cfg.estimator = parse_estimator(f.estimator);
    if (given(sub, "--quad-order"))
        cfg.quad_order = f.quad_order;
    if (given(sub, "--threads"))
        cfg.threads = f.threads;
    if (given(sub, "--out"))
        cfg.out = f.out;
    cfg.resolve();
    return cfg;
}

void write_file(const std::string& path, const auto& writer)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("cannot open '" + path + "' for writing");
    writer(os);
}

int run(const CLI::App* sub, const Flags& f, onebit::Experiment experiment)
{
    const RunConfig cfg = build_config(sub, f, experiment);

    if (experiment == onebit::Experiment::diag) {
        if (cfg.out.empty())
            onebit::run_diag(cfg, std::cout);
        else
            write_file(cfg.out, [&](std::ostream& os) { onebit::run_diag(cfg, os); });
        return 0;
    }

    if (!f.dump.empty()) {
        const auto first = onebit::first_trial_data(cfg);
        if (first.data.trimmed)
            std::cerr << "note: odd n, last observation trimmed\n";
        write_file(f.dump + "_data.csv",
                   [&](std::ostream& os) { onebit::write_dataset_csv(os, first.data); });
        write_file(f.dump + "_moment.csv",
                   [&](std::ostream& os) { onebit::write_matrix_csv(os, first.moment.entries); });
    }
    for (int n : cfg.n)
        if (n % 2 != 0)
            std::cerr << "note: n=" << n << " is odd; the last observation of each trial is trimmed\n";

    const auto rows = onebit::run_experiment(cfg);
    if (cfg.out.empty())
        onebit::write_rows_csv(std::cout, rows);
    else
        write_file(cfg.out, [&](std::ostream& os) { onebit::write_rows_csv(os, rows); });

    const auto summary = onebit::summarize(rows);
    if (f.summary.empty())
        onebit::write_summary(std::cerr, summary);
    else
        write_file(f.summary, [&](std::ostream& os) { onebit::write_summary(os, summary); });
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral recovery of a unit vector from one-bit observations"};
    app.require_subcommand(1);

    Flags flags;
    struct Entry {
        const char* name;
        const char* help;
        onebit::Experiment experiment;
        CLI::App* sub = nullptr;
    };
    Entry entries[] = {
        {"eigs", "top two eigenvalues of M/4 across a noise sweep", onebit::Experiment::eigs},
        {"lowdim", "dense recovery by power iteration", onebit::Experiment::lowdim},
        {"sparse", "sparse recovery: Fantope relaxation + truncated power method",
         onebit::Experiment::sparse},
        {"diag", "moments and theory diagnostics of a link", onebit::Experiment::diag},
    };
    for (auto& e : entries) {
        e.sub = app.add_subcommand(e.name, e.help);
        add_common(e.sub, flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& e : entries)
            if (e.sub->parsed())
                return run(e.sub, flags, e.experiment);
    } catch (const onebit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const onebit::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
