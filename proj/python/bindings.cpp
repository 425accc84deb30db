#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sapgp/dist.hpp"
#include "sapgp/dpp.hpp"
#include "sapgp/errors.hpp"
#include "sapgp/gp.hpp"
#include "sapgp/kernels.hpp"
#include "sapgp/randnla.hpp"
#include "sapgp/solvers.hpp"

namespace py = pybind11;
using namespace sapgp;

namespace {

KernelSpec make_spec(const std::string& family, const Eigen::VectorXd& lengthscales, double variance, Index dim) {
    KernelSpec spec{parse_kernel_family(family), lengthscales, variance};
    if (spec.lengthscales.size() == 1 && dim > 1) spec.lengthscales = Eigen::VectorXd::Constant(dim, lengthscales(0));
    spec.validate();
    return spec;
}

SolverConfig make_config(Index blocksize, Index rank, double max_passes, double tolerance, std::uint64_t seed,
                         double sdd_scale) {
    SolverConfig cfg;
    cfg.blocksize = blocksize;
    cfg.rank = rank;
    cfg.max_passes = max_passes;
    cfg.tolerance = tolerance;
    cfg.seed = seed;
    cfg.sdd_scale = sdd_scale;
    return cfg;
}

py::dict result_dict(const SolveResult& r) {
    std::vector<double> passes, residual;
    for (const auto& rec : r.trace.records) {
        if (std::isnan(rec.rel_residual)) continue;
        passes.push_back(rec.passes);
        residual.push_back(rec.rel_residual);
    }
    py::dict d;
    d["weights"] = r.w;
    d["status"] = to_string(r.status);
    d["iterations"] = r.iterations;
    d["passes"] = r.passes;
    d["trace_passes"] = passes;
    d["trace_rel_residual"] = residual;
    return d;
}

}  // namespace

PYBIND11_MODULE(_sapgp, m) {
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def(
        "kernel_matrix",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::string& family,
           const Eigen::VectorXd& lengthscales, double variance) {
            const KernelOracle k(make_spec(family, lengthscales, variance, a.cols()), a, 0.0);
            return k.cross(a, b);
        },
        py::arg("a"), py::arg("b"), py::arg("family") = "rbf", py::arg("lengthscales") = Eigen::VectorXd::Ones(1),
        py::arg("variance") = 1.0);

    m.def(
        "solve_kernel",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double noise, const std::string& solver,
           const std::string& family, const Eigen::VectorXd& lengthscales, double variance, Index blocksize,
           Index rank, double max_passes, double tolerance, std::uint64_t seed, int workers, double sdd_scale) {
            WorkerPool pool(workers);
            const KernelOperator op(KernelOracle(make_spec(family, lengthscales, variance, x.cols()), x, noise), pool);
            const SolverConfig cfg = make_config(blocksize, rank, max_passes, tolerance, seed, sdd_scale);
            SolveResult r;
            {
                py::gil_scoped_release release;
                r = solve(parse_solver_id(solver), op, y, cfg);
            }
            return result_dict(r);
        },
        py::arg("x"), py::arg("y"), py::arg("noise"), py::arg("solver") = "adasap", py::arg("family") = "rbf",
        py::arg("lengthscales") = Eigen::VectorXd::Ones(1), py::arg("variance") = 1.0, py::arg("blocksize") = 0,
        py::arg("rank") = 0, py::arg("max_passes") = 50.0, py::arg("tolerance") = 0.0, py::arg("seed") = 0,
        py::arg("workers") = 1, py::arg("sdd_scale") = 1.0);

    m.def(
        "solve_dense",
        [](const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double noise, const std::string& solver,
           Index blocksize, Index rank, double max_passes, double tolerance, std::uint64_t seed, double sdd_scale) {
            const DenseOperator op(k, noise);
            const SolverConfig cfg = make_config(blocksize, rank, max_passes, tolerance, seed, sdd_scale);
            SolveResult r;
            {
                py::gil_scoped_release release;
                r = solve(parse_solver_id(solver), op, y, cfg);
            }
            return result_dict(r);
        },
        py::arg("k"), py::arg("y"), py::arg("noise"), py::arg("solver") = "adasap", py::arg("blocksize") = 0,
        py::arg("rank") = 0, py::arg("max_passes") = 50.0, py::arg("tolerance") = 0.0, py::arg("seed") = 0,
        py::arg("sdd_scale") = 1.0);

    m.def(
        "posterior_samples",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& x_test, double noise,
           Index num_samples, Index num_features, const std::string& solver, const std::string& family,
           const Eigen::VectorXd& lengthscales, double variance, Index blocksize, double max_passes,
           std::uint64_t seed) {
            WorkerPool pool(1);
            const KernelOracle oracle(make_spec(family, lengthscales, variance, x.cols()), x, noise);
            const KernelOperator op(oracle, pool);
            const SolverConfig cfg = make_config(blocksize, 0, max_passes, 0.0, seed, 1.0);
            const SolverId id = parse_solver_id(solver);
            const SystemSolver solve_fn = [&](const Eigen::MatrixXd& rhs) { return solve(id, op, rhs, cfg).w; };
            const auto set = pathwise_sample(oracle, x, x_test, y, solve_fn, num_samples, num_features, seed);
            return py::make_tuple(set.mean, set.samples);
        },
        py::arg("x"), py::arg("y"), py::arg("x_test"), py::arg("noise"), py::arg("num_samples") = 16,
        py::arg("num_features") = 2048, py::arg("solver") = "adasap", py::arg("family") = "rbf",
        py::arg("lengthscales") = Eigen::VectorXd::Ones(1), py::arg("variance") = 1.0, py::arg("blocksize") = 0,
        py::arg("max_passes") = 50.0, py::arg("seed") = 0);

    m.def(
        "rand_nystrom",
        [](const Eigen::MatrixXd& sketch, const Eigen::MatrixXd& omega, Index rank) {
            const auto f = rand_nystrom(sketch, omega, rank);
            return py::make_tuple(f.U, f.S);
        },
        py::arg("sketch"), py::arg("omega"), py::arg("rank"));

    m.def(
        "nystrom_apply_inv",
        [](const Eigen::MatrixXd& u, const Eigen::VectorXd& s, double rho, const Eigen::MatrixXd& g) {
            return apply_inv(NystromFactor{u, s}, rho, g);
        },
        py::arg("U"), py::arg("S"), py::arg("rho"), py::arg("g"));

    m.def(
        "sample_kdpp",
        [](const Eigen::MatrixXd& a, Index k, std::uint64_t seed) { return sample_kdpp(DppModel(a, k), seed); },
        py::arg("a"), py::arg("k"), py::arg("seed") = 0);

    m.attr("__version__") = SAPGP_VERSION;
}
