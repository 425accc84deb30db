#include "sapgp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sapgp/config.hpp"
#include "sapgp/core_data.hpp"
#include "sapgp/dist.hpp"
#include "sapgp/errors.hpp"
#include "sapgp/gp.hpp"
#include "sapgp/random.hpp"
#include "sapgp/theory_lab.hpp"

namespace sapgp {
namespace fs = std::filesystem;
using nlohmann::json;

BenchEntry parse_bench_entry(const std::string& label) {
    if (label.rfind("sdd-", 0) == 0) {
        try {
            return {label, SolverId::sdd, std::stod(label.substr(4))};
        } catch (const std::exception&) {
            throw ConfigError("bad SDD scale in '" + label + "'");
        }
    }
    return {label, parse_solver_id(label), 1.0};
}

std::vector<BenchRow> run_bench(const BlockOperator& op, const Eigen::MatrixXd& y,
                                const std::vector<BenchEntry>& entries, const std::vector<std::uint64_t>& seeds,
                                const SolverConfig& base, double target) {
    std::vector<BenchRow> rows;
    for (const auto& e : entries) {
        for (auto seed : seeds) {
            SolverConfig cfg = base;
            cfg.seed = seed;
            cfg.sdd_scale = e.sdd_scale;
            const auto result = solve(e.id, op, y, cfg);
            rows.push_back({e.label, seed, result.status, result.trace.passes_to(target),
                            result.trace.final_rel_residual()});
        }
    }
    return rows;
}

double median_passes(const std::vector<BenchRow>& rows, const std::string& label) {
    std::vector<double> v;
    for (const auto& r : rows)
        if (r.label == label) v.push_back(r.passes_to_target);
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    if (v.size() % 2 == 1) return v[m];
    return 0.5 * (v[m - 1] + v[m]);
}

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string suite;
};

struct Loaded {
    json tree;
    RunConfig config;
};

Loaded load_config(const Options& opt) {
    json tree = json::object();
    if (!opt.config_path.empty()) {
        std::ifstream f(opt.config_path);
        if (!f) throw ConfigError("cannot open config file " + opt.config_path);
        try {
            tree = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
        }
    }
    for (const auto& o : opt.overrides) apply_override(tree, o);
    if (opt.workers) tree["num_workers"] = *opt.workers;
    if (opt.seed) tree["seed"] = *opt.seed;
    RunConfig config = parse_config(tree);
    return {to_json(config), std::move(config)};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
}

void write_manifest(const fs::path& dir, const std::string& command, const Loaded& loaded) {
    json m;
    m["tool"] = "sapgp";
    m["version"] = SAPGP_VERSION;
    m["command"] = command;
    m["config_hash"] = config_hash(loaded.tree);
    m["seed"] = loaded.config.seed;
    m["num_workers"] = loaded.config.num_workers;
    m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    m["config"] = loaded.tree;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

Dataset synthetic_kernel_data(const SyntheticConfig& sc, std::uint64_t seed) {
    Rng rng = make_stream(seed, "data");
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    Eigen::MatrixXd x(sc.n, sc.dim);
    for (Index i = 0; i < sc.n; ++i)
        for (Index j = 0; j < sc.dim; ++j) x(i, j) = unif(rng);
    const Eigen::VectorXd noise = sc.noise * gaussian_vector(sc.n, rng);
    Eigen::VectorXd y(sc.n);
    for (Index i = 0; i < sc.n; ++i) y(i) = x.row(i).array().sin().sum() + noise(i);
    return Dataset(std::move(x), std::move(y));
}

Dataset load_dataset(const RunConfig& c) {
    if (c.dataset) {
        if (c.dataset->path.empty()) throw ConfigError("dataset.path is empty");
        if (!fs::exists(c.dataset->path)) throw ConfigError("dataset file not found: " + c.dataset->path);
        return load_csv(c.dataset->path, c.dataset->target_column);
    }
    if (c.synthetic && c.synthetic->type == "kernel") return synthetic_kernel_data(*c.synthetic, c.seed);
    throw ConfigError("no dataset configured (set dataset.path or synthetic.type=kernel)");
}

// A linear system together with whatever owns its storage.
struct System {
    std::unique_ptr<WorkerPool> pool;
    std::unique_ptr<BlockOperator> op;
    Eigen::MatrixXd y;
};

SyntheticSpectrumProblem spectrum_problem(const SyntheticConfig& sc, const RunConfig& c) {
    Eigen::VectorXd spec = polynomial_spectrum(sc.n, sc.decay);
    if (sc.trace_normalize) spec *= static_cast<double>(sc.n) / spec.sum();
    return SyntheticSpectrumProblem(spec, c.likelihood_variance, derive_seed(c.seed, "problem"));
}

System build_system(const RunConfig& c) {
    System s;
    if (!c.dataset && c.synthetic && c.synthetic->type == "spectrum") {
        const auto problem = spectrum_problem(*c.synthetic, c);
        s.op = std::make_unique<DenseOperator>(problem.kernel, problem.lambda);
        s.y = problem.y;
        return s;
    }
    const Dataset ds = standardize(load_dataset(c));
    s.pool = std::make_unique<WorkerPool>(c.num_workers);
    KernelOracle oracle(c.kernel_for(ds.dim()), ds.features, c.likelihood_variance);
    s.op = std::make_unique<KernelOperator>(std::move(oracle), *s.pool);
    s.y = ds.targets;
    return s;
}

int cmd_solve(const Options& opt, std::ostream& out) {
    const Loaded loaded = load_config(opt);
    const RunConfig& c = loaded.config;
    const System sys = build_system(c);
    const SolverConfig cfg = c.solver_config(sys.op->size());
    const SolveResult result = solve(c.solver_id, *sys.op, sys.y, cfg);

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    result.trace.write_csv(dir / "trace.csv");
    std::ostringstream w;
    w << std::setprecision(17);
    for (Index i = 0; i < result.w.rows(); ++i) {
        for (Index j = 0; j < result.w.cols(); ++j) w << (j ? "," : "") << result.w(i, j);
        w << '\n';
    }
    write_text(dir / "weights.csv", w.str());
    json summary = {{"solver", to_string(c.solver_id)},
                    {"status", to_string(result.status)},
                    {"iterations", result.iterations},
                    {"passes", result.passes},
                    {"final_rel_residual", result.trace.final_rel_residual()}};
    write_text(dir / "result.json", summary.dump(2) + "\n");
    write_manifest(dir, "solve", loaded);
    out << to_string(c.solver_id) << ": " << to_string(result.status) << " after " << result.iterations
        << " iterations, relative residual " << result.trace.final_rel_residual() << '\n';
    return result.status == SolveStatus::diverged ? kExitDiverged : kExitOk;
}

int cmd_infer(const Options& opt, std::ostream& out) {
    const Loaded loaded = load_config(opt);
    const RunConfig& c = loaded.config;
    const Dataset raw = load_dataset(c);
    const double fraction = c.dataset ? c.dataset->test_fraction : 0.1;
    const auto [train, test] = train_test_split(raw, fraction, c.seed);

    WorkerPool pool(c.num_workers);
    const KernelOracle oracle(c.kernel_for(train.dim()), train.features, c.likelihood_variance);
    const KernelOperator op(oracle, pool);
    const SolverConfig cfg = c.solver_config(train.size());
    bool diverged = false;
    const SystemSolver solver = [&](const Eigen::MatrixXd& rhs) {
        const auto r = solve(c.solver_id, op, rhs, cfg);
        diverged = diverged || r.status == SolveStatus::diverged;
        return r.w;
    };

    const Index s = c.num_samples;
    Eigen::VectorXd mean;
    Eigen::VectorXd var = Eigen::VectorXd::Constant(test.size(), std::numeric_limits<double>::quiet_NaN());
    Eigen::MatrixXd samples;
    std::optional<double> nll;
    if (s == 0) {
        mean = posterior_mean(oracle, solver, train.targets)(test.features);
    } else {
        const auto set = pathwise_sample(oracle, train.features, test.features, train.targets, solver, s,
                                         c.num_features, derive_seed(c.seed, "pathwise"));
        samples = set.samples;
        mean = set.mean;
        if (s >= 2) {
            var = set.sample_variance().array() + c.likelihood_variance;
            nll = mean_nll(set.sample_mean(), var, test.targets);
        }
    }

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    write_predictions_csv(dir / "predictions.csv", mean, var, s > 0 ? &samples : nullptr);
    json metrics = {{"rmse", rmse(mean, test.targets)},
                    {"baseline_rmse", rmse(Eigen::VectorXd::Zero(test.size()), test.targets)},
                    {"num_train", train.size()},
                    {"num_test", test.size()},
                    {"num_samples", s},
                    {"solver", to_string(c.solver_id)},
                    {"diverged", diverged}};
    if (nll) metrics["nll"] = *nll;
    write_text(dir / "metrics.json", metrics.dump(2) + "\n");
    write_manifest(dir, "infer", loaded);
    out << "rmse " << metrics["rmse"].get<double>();
    if (nll) out << ", nll " << *nll;
    out << '\n';
    return diverged ? kExitDiverged : kExitOk;
}

template <class T>
T vget(const json& v, const char* key, T fallback) {
    return v.contains(key) ? v.at(key).get<T>() : fallback;
}

int cmd_verify(const Options& opt, std::ostream& out) {
    const Loaded loaded = load_config(opt);
    const RunConfig& c = loaded.config;
    const json& v = c.verify;
    std::string suite = opt.suite.empty() ? vget<std::string>(v, "suite", "") : opt.suite;
    const std::uint64_t seed = c.seed;

    json report;
    std::string extra_csv;
    bool pass = false;
    if (suite == "lemma2") {
        const Index n = vget<Index>(v, "n", 64);
        const SyntheticSpectrumProblem problem(polynomial_spectrum(n, vget<double>(v, "decay", 2.0)),
                                               vget<double>(v, "lambda", 1e-3), derive_seed(seed, "problem"));
        const auto r = verify_lemma2(problem, vget<Index>(v, "b", 8), vget<Index>(v, "num_samples", 5000), seed);
        report = r.to_json();
        pass = r.pass();
    } else if (suite == "theorem1") {
        const Index n = vget<Index>(v, "n", 256);
        const SyntheticSpectrumProblem problem(polynomial_spectrum(n, vget<double>(v, "decay", 2.0)),
                                               vget<double>(v, "lambda", 1e-4), derive_seed(seed, "problem"));
        const auto r = verify_theorem1(problem, vget<Index>(v, "b", 16), vget<Index>(v, "ell", 8),
                                       vget<Index>(v, "trials", 100), vget<Index>(v, "horizon", 2000), seed,
                                       parse_sampler_kind(vget<std::string>(v, "sampler", "kdpp")),
                                       vget<Index>(v, "projection_samples", 2000));
        report = r.to_json();
        extra_csv = r.csv();
        pass = r.pass();
    } else if (suite == "linear_rate") {
        const Index n = vget<Index>(v, "n", 256);
        const SyntheticSpectrumProblem problem(polynomial_spectrum(n, vget<double>(v, "decay", 2.0)),
                                               vget<double>(v, "lambda", 1e-4), derive_seed(seed, "problem"));
        const auto r = verify_linear_rate(problem, vget<Index>(v, "b", 16), vget<Index>(v, "trials", 100),
                                          vget<Index>(v, "horizon", 500), seed,
                                          vget<Index>(v, "projection_samples", 2000));
        report = r.to_json();
        pass = r.pass();
    } else if (suite == "corollary1") {
        const Index n = vget<Index>(v, "n", 512);
        const SyntheticSpectrumProblem problem(polynomial_spectrum(n, vget<double>(v, "decay", 2.0)),
                                               vget<double>(v, "lambda", 1e-3), derive_seed(seed, "problem"));
        const auto r = verify_corollary1(problem, vget<Index>(v, "ell", 8), vget<double>(v, "epsilon", 0.1),
                                         vget<double>(v, "constant", 8.0), vget<Index>(v, "trials", 20), seed);
        report = r.to_json();
        pass = r.pass();
    } else if (suite == "nystrom") {
        const auto r = verify_nystrom(seed);
        report = r.to_json();
        pass = r.pass();
    } else if (suite == "pathwise") {
        const auto r = verify_pathwise(vget<Index>(v, "n", 30), vget<Index>(v, "num_test", 5),
                                       vget<Index>(v, "num_samples", 2000), vget<Index>(v, "num_features", 2048),
                                       seed);
        report = r.to_json();
        pass = r.pass();
    } else {
        throw ConfigError("unknown verify suite '" + suite + "'");
    }

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    write_text(dir / "report.json", report.dump(2) + "\n");
    if (!extra_csv.empty()) write_text(dir / (suite + ".csv"), extra_csv);
    write_manifest(dir, "verify", loaded);
    out << suite << ": " << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kExitOk : kExitVerifyFailed;
}

int cmd_bench(const Options& opt, std::ostream& out) {
    const Loaded loaded = load_config(opt);
    const RunConfig& c = loaded.config;
    const System sys = build_system(c);
    const json& b = c.bench;
    std::vector<BenchEntry> entries;
    for (const auto& label :
         vget<std::vector<std::string>>(b, "solvers", {"adasap", "adasap_i", "sdd-1", "sdd-10", "sdd-100"}))
        entries.push_back(parse_bench_entry(label));
    std::vector<std::uint64_t> seeds;
    const Index count = vget<Index>(b, "seeds", 5);
    for (Index i = 0; i < count; ++i) seeds.push_back(derive_seed(c.seed, "bench", static_cast<std::uint64_t>(i)));
    const double target = vget<double>(b, "target", 1e-3);

    const auto rows = run_bench(*sys.op, sys.y, entries, seeds, c.solver_config(sys.op->size()), target);

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << std::setprecision(17) << "solver,seed,status,passes_to_target,final_rel_residual\n";
    for (const auto& r : rows)
        csv << r.label << ',' << r.seed << ',' << to_string(r.status) << ',' << r.passes_to_target << ','
            << r.final_rel_residual << '\n';
    write_text(dir / "bench.csv", csv.str());
    json summary = json::object();
    for (const auto& e : entries) {
        const double med = median_passes(rows, e.label);
        summary[e.label] = std::isfinite(med) ? json(med) : json("inf");
        out << e.label << ": median passes to " << target << " = " << med << '\n';
    }
    write_text(dir / "bench.json", summary.dump(2) + "\n");
    write_manifest(dir, "bench", loaded);
    return kExitOk;
}

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_path, "JSON config file");
    cmd->add_option("--set", opt.overrides, "Override a config key (key=value, repeatable)");
    cmd->add_option("--workers", opt.workers, "Number of workers")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "Root seed");
    cmd->add_option("--out", opt.out_dir, "Output directory");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sketch-and-project solvers for Gaussian process inference"};
    app.require_subcommand(1);
    Options opt;
    auto* solve_cmd = app.add_subcommand("solve", "Run a solver and write its trace");
    auto* infer_cmd = app.add_subcommand("infer", "Posterior mean and pathwise samples on a train/test split");
    auto* verify_cmd = app.add_subcommand("verify", "Run a theory verification suite");
    auto* bench_cmd = app.add_subcommand("bench", "Passes-to-target for several solvers and seeds");
    for (auto* cmd : {solve_cmd, infer_cmd, verify_cmd, bench_cmd}) add_common(cmd, opt);
    verify_cmd->add_option("suite", opt.suite, "lemma2, theorem1, linear_rate, corollary1, nystrom or pathwise");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
    }

    try {
        if (*solve_cmd) return cmd_solve(opt, out);
        if (*infer_cmd) return cmd_infer(opt, out);
        if (*verify_cmd) return cmd_verify(opt, out);
        if (*bench_cmd) return cmd_bench(opt, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace sapgp
