#include "sapgp/config.hpp"

#include <cstdio>
#include <initializer_list>
#include <set>

#include "sapgp/errors.hpp"
#include "sapgp/random.hpp"

namespace sapgp {
namespace {

using nlohmann::json;

void reject_unknown(const json& node, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!node.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : node.items())
        if (!keys.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
}

template <class T>
T get(const json& node, const char* key, const std::string& where) {
    try {
        return node.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + where + key + "': " + e.what());
    }
}

template <class T>
void read(const json& node, const char* key, T& out, const std::string& where = "") {
    if (node.contains(key)) out = get<T>(node, key, where);
}

std::optional<double> read_accel(const json& node, const char* key) {
    if (!node.contains(key)) return std::nullopt;
    const auto& v = node.at(key);
    if (v.is_string() && v.get<std::string>() == "default") return std::nullopt;
    if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number or \"default\"");
    return v.get<double>();
}

}  // namespace

RunConfig parse_config(const json& tree) {
    reject_unknown(tree,
                   {"kernel", "likelihood_variance", "blocksize", "nystrom_rank", "max_iters", "max_passes",
                    "solver_id", "sampler", "tail_average", "accelerate", "gradient_at", "seed", "num_workers", "mu",
                    "nu", "tolerance", "residual_every", "sdd_scale", "num_samples", "num_features", "dataset",
                    "synthetic", "verify", "bench"},
                   "");
    RunConfig c;
    c.kernel.lengthscales = Eigen::VectorXd::Ones(1);
    if (tree.contains("kernel")) {
        const auto& k = tree.at("kernel");
        reject_unknown(k, {"family", "lengthscales", "variance"}, "kernel.");
        if (k.contains("family")) c.kernel.family = parse_kernel_family(get<std::string>(k, "family", "kernel."));
        if (k.contains("lengthscales")) {
            const auto& ls = k.at("lengthscales");
            if (ls.is_number()) {
                c.kernel.lengthscales = Eigen::VectorXd::Constant(1, ls.get<double>());
            } else {
                const auto v = get<std::vector<double>>(k, "lengthscales", "kernel.");
                c.kernel.lengthscales = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
            }
        }
        read(k, "variance", c.kernel.variance, "kernel.");
    }
    read(tree, "likelihood_variance", c.likelihood_variance);
    read(tree, "blocksize", c.blocksize);
    read(tree, "nystrom_rank", c.nystrom_rank);
    read(tree, "max_iters", c.max_iters);
    read(tree, "max_passes", c.max_passes);
    if (tree.contains("solver_id")) c.solver_id = parse_solver_id(get<std::string>(tree, "solver_id", ""));
    if (tree.contains("sampler")) c.sampler = parse_sampler_kind(get<std::string>(tree, "sampler", ""));
    read(tree, "tail_average", c.tail_average);
    read(tree, "accelerate", c.accelerate);
    read(tree, "gradient_at", c.gradient_at);
    read(tree, "seed", c.seed);
    read(tree, "num_workers", c.num_workers);
    c.mu = read_accel(tree, "mu");
    c.nu = read_accel(tree, "nu");
    read(tree, "tolerance", c.tolerance);
    read(tree, "residual_every", c.residual_every);
    read(tree, "sdd_scale", c.sdd_scale);
    read(tree, "num_samples", c.num_samples);
    read(tree, "num_features", c.num_features);
    if (tree.contains("dataset")) {
        const auto& d = tree.at("dataset");
        reject_unknown(d, {"path", "target_column", "test_fraction"}, "dataset.");
        DatasetConfig ds;
        read(d, "path", ds.path, "dataset.");
        if (d.contains("target_column")) {
            const auto& tc = d.at("target_column");
            if (tc.is_string())
                ds.target_column = tc.get<std::string>();
            else if (tc.is_number_integer())
                ds.target_column = tc.get<Index>();
            else
                throw ConfigError("dataset.target_column must be a name or an integer index");
        }
        read(d, "test_fraction", ds.test_fraction, "dataset.");
        c.dataset = ds;
    }
    if (tree.contains("synthetic")) {
        const auto& s = tree.at("synthetic");
        reject_unknown(s, {"type", "n", "dim", "decay", "trace_normalize", "noise"}, "synthetic.");
        SyntheticConfig sc;
        read(s, "type", sc.type, "synthetic.");
        read(s, "n", sc.n, "synthetic.");
        read(s, "dim", sc.dim, "synthetic.");
        read(s, "decay", sc.decay, "synthetic.");
        read(s, "trace_normalize", sc.trace_normalize, "synthetic.");
        read(s, "noise", sc.noise, "synthetic.");
        if (sc.type != "kernel" && sc.type != "spectrum")
            throw ConfigError("synthetic.type must be \"kernel\" or \"spectrum\"");
        c.synthetic = sc;
    }
    if (tree.contains("verify")) {
        c.verify = tree.at("verify");
        reject_unknown(c.verify,
                       {"suite", "n", "b", "ell", "trials", "horizon", "num_samples", "decay", "lambda", "epsilon",
                        "constant", "projection_samples", "num_test", "num_features", "sampler"},
                       "verify.");
    }
    if (tree.contains("bench")) {
        c.bench = tree.at("bench");
        reject_unknown(c.bench, {"solvers", "seeds", "target"}, "bench.");
    }
    c.validate();
    return c;
}

void RunConfig::validate(std::optional<Index> n) const {
    kernel.validate();
    if (!(likelihood_variance > 0.0)) throw ConfigError("likelihood_variance must be positive");
    if (blocksize < 0 || nystrom_rank < 0) throw ConfigError("blocksize and nystrom_rank must be nonnegative");
    if (blocksize > 0 && nystrom_rank > blocksize) throw ConfigError("nystrom_rank must not exceed blocksize");
    if (max_iters < 0 || max_passes < 0.0) throw ConfigError("budgets must be nonnegative");
    if (max_iters == 0 && max_passes == 0.0) throw ConfigError("set max_iters or max_passes");
    if (num_workers < 1) throw ConfigError("num_workers must be at least 1");
    if (gradient_at != "z" && gradient_at != "w") throw ConfigError("gradient_at must be \"z\" or \"w\"");
    if (mu && !(*mu > 0.0)) throw ConfigError("mu must be positive");
    if (nu && !(*nu > 0.0)) throw ConfigError("nu must be positive");
    if (tolerance < 0.0) throw ConfigError("tolerance must be nonnegative");
    if (sdd_scale < 0.0) throw ConfigError("sdd_scale must be nonnegative");
    if (num_samples < 0 || num_features < 1) throw ConfigError("num_samples >= 0 and num_features >= 1 required");
    if (dataset && !(dataset->test_fraction > 0.0 && dataset->test_fraction < 1.0))
        throw ConfigError("dataset.test_fraction must lie in (0, 1)");
    if (synthetic && (synthetic->n < 2 || synthetic->dim < 1)) throw ConfigError("synthetic.n >= 2 and dim >= 1");
    if (n) {
        const Index b = blocksize > 0 ? blocksize : default_blocksize(*n);
        if (b > *n) throw ConfigError("blocksize exceeds the number of training points");
        const Index r = nystrom_rank > 0 ? nystrom_rank : default_rank(b);
        if (r > b) throw ConfigError("nystrom_rank must not exceed blocksize");
    }
}

SolverConfig RunConfig::solver_config(Index n) const {
    validate(n);
    SolverConfig s;
    s.blocksize = blocksize;
    s.rank = nystrom_rank;
    s.max_iters = max_iters;
    s.max_passes = max_passes;
    s.tolerance = tolerance;
    s.tail_average = tail_average;
    s.seed = seed;
    s.mu = mu;
    s.nu = nu;
    s.accelerate = accelerate;
    s.gradient_at_z = gradient_at == "z";
    s.residual_every = residual_every;
    s.sdd_scale = sdd_scale;
    return s;
}

KernelSpec RunConfig::kernel_for(Index d) const {
    KernelSpec k = kernel;
    if (k.lengthscales.size() == 1 && d > 1) k.lengthscales = Eigen::VectorXd::Constant(d, k.lengthscales(0));
    if (k.lengthscales.size() != d)
        throw ConfigError("kernel.lengthscales has " + std::to_string(k.lengthscales.size()) +
                          " entries but the data has " + std::to_string(d) + " features");
    return k;
}

void apply_override(json& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &tree;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("empty key in override " + path);
        if (!node->is_object()) throw ConfigError("override path " + path + " crosses a non-object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

json to_json(const RunConfig& c) {
    json out;
    out["kernel"] = {{"family", to_string(c.kernel.family)},
                     {"lengthscales", std::vector<double>(c.kernel.lengthscales.data(),
                                                          c.kernel.lengthscales.data() + c.kernel.lengthscales.size())},
                     {"variance", c.kernel.variance}};
    out["likelihood_variance"] = c.likelihood_variance;
    out["blocksize"] = c.blocksize;
    out["nystrom_rank"] = c.nystrom_rank;
    out["max_iters"] = c.max_iters;
    out["max_passes"] = c.max_passes;
    out["solver_id"] = to_string(c.solver_id);
    out["sampler"] = to_string(c.sampler);
    out["tail_average"] = c.tail_average;
    out["accelerate"] = c.accelerate;
    out["gradient_at"] = c.gradient_at;
    out["seed"] = c.seed;
    out["num_workers"] = c.num_workers;
    out["mu"] = c.mu ? json(*c.mu) : json("default");
    out["nu"] = c.nu ? json(*c.nu) : json("default");
    out["tolerance"] = c.tolerance;
    out["residual_every"] = c.residual_every;
    out["sdd_scale"] = c.sdd_scale;
    out["num_samples"] = c.num_samples;
    out["num_features"] = c.num_features;
    if (c.dataset) {
        json tc = std::holds_alternative<std::string>(c.dataset->target_column)
                      ? json(std::get<std::string>(c.dataset->target_column))
                      : json(std::get<Index>(c.dataset->target_column));
        out["dataset"] = {{"path", c.dataset->path}, {"target_column", tc}, {"test_fraction", c.dataset->test_fraction}};
    }
    if (c.synthetic)
        out["synthetic"] = {{"type", c.synthetic->type},
                            {"n", c.synthetic->n},
                            {"dim", c.synthetic->dim},
                            {"decay", c.synthetic->decay},
                            {"trace_normalize", c.synthetic->trace_normalize},
                            {"noise", c.synthetic->noise}};
    out["verify"] = c.verify;
    out["bench"] = c.bench;
    return out;
}

std::string config_hash(const json& tree) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(tree.dump())));
    return buf;
}

}  // namespace sapgp
