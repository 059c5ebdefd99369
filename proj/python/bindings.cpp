#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "flexikry/cli.hpp"
#include "flexikry/groups.hpp"
#include "flexikry/problems.hpp"
#include "flexikry/solvers.hpp"
#include "flexikry/transforms.hpp"

namespace py = pybind11;
using namespace flexikry;

namespace {

GroupStructure make_groups(Index n, const std::vector<std::vector<Index>>& groups) {
  return GroupStructure(n, groups);
}

SolverConfig config_from_name(const std::string& name, Index max_iters, std::optional<double> tau_lambda,
                              const std::string& lambda_mode, double fixed_lambda, double gamma,
                              Index snapshot_every) {
  const SolverSpec spec = parse_solver_name(name);
  SolverConfig c;
  c.variant = spec.variant;
  c.regularizer = spec.regularizer;
  c.max_iters = max_iters;
  c.tau_lambda = tau_lambda.value_or(spec.gmres_family() ? 0.8 : 1.2);
  c.gamma = gamma;
  c.fixed_lambda = fixed_lambda;
  c.snapshot_every = snapshot_every;
  if (lambda_mode == "dp") {
    c.lambda_mode = LambdaMode::dp;
  } else if (lambda_mode == "fixed") {
    c.lambda_mode = LambdaMode::fixed;
  } else {
    throw std::invalid_argument("lambda_mode must be 'dp' or 'fixed'");
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_flexikry, m) {
  m.doc() = "Flexible Krylov solvers for group-sparse regularization";
  m.attr("__version__") = cli::kVersion;

  py::class_<GroupStructure>(m, "GroupStructure")
      .def(py::init(&make_groups), py::arg("n"), py::arg("groups"))
      .def_property_readonly("n", &GroupStructure::n)
      .def_property_readonly("groups", &GroupStructure::groups)
      .def_property_readonly("overlapping", &GroupStructure::overlapping)
      .def("__len__", &GroupStructure::size)
      .def("group_norms", &GroupStructure::group_norms);

  py::enum_<TreeStrategy>(m, "TreeStrategy")
      .value("G1", TreeStrategy::G1)
      .value("G2", TreeStrategy::G2);

  m.def("singleton_groups", &singleton_groups, py::arg("n"));
  m.def("temporal_groups", &temporal_groups, py::arg("n_space"), py::arg("n_time"));
  m.def(
      "wavelet_tree_groups",
      [](Index rows, Index cols, int levels, TreeStrategy s) {
        return wavelet_tree_groups(WaveletLayout(rows, cols, levels), s);
      },
      py::arg("rows"), py::arg("cols"), py::arg("levels"), py::arg("strategy") = TreeStrategy::G1);
  m.def("group_norm", &group_norm, py::arg("groups"), py::arg("z"));
  m.def(
      "compute_weights",
      [](const GroupStructure& gs, const Vector& z, double tau) { return compute_weights(gs, z, tau).diag; },
      py::arg("groups"), py::arg("z"), py::arg("tau") = kDefaultTau);

  m.def(
      "haar_forward",
      [](const Vector& image, Index rows, Index cols, int levels) {
        return haar_forward(image, WaveletLayout(rows, cols, levels));
      },
      py::arg("image"), py::arg("rows"), py::arg("cols"), py::arg("levels"));
  m.def(
      "haar_inverse",
      [](const Vector& coeffs, Index rows, Index cols, int levels) {
        return haar_inverse(coeffs, WaveletLayout(rows, cols, levels));
      },
      py::arg("coeffs"), py::arg("rows"), py::arg("cols"), py::arg("levels"));

  py::class_<TestProblem>(m, "TestProblem")
      .def_readonly("name", &TestProblem::name)
      .def_readonly("x_true", &TestProblem::x_true)
      .def_readonly("b", &TestProblem::b)
      .def_readonly("noise_norm", &TestProblem::noise_norm)
      .def_readonly("groups", &TestProblem::groups)
      .def_readonly("xi_true", &TestProblem::xi_true)
      .def_readonly("s_true", &TestProblem::s_true)
      .def_readonly("metadata", &TestProblem::metadata)
      .def_property_readonly("n", &TestProblem::n)
      .def_property_readonly("m", &TestProblem::m)
      .def("apply", [](const TestProblem& p, const Vector& x) { return p.a.apply(x); })
      .def("apply_adjoint", [](const TestProblem& p, const Vector& y) { return p.a.apply_adjoint(y); });

  m.def(
      "wavelet_deblur",
      [](Index size, int levels, TreeStrategy strategy, double noise_level, std::uint64_t seed) {
        return gen_wavelet_deblur({.size = size, .levels = levels, .strategy = strategy,
                                   .noise_level = noise_level, .seed = seed});
      },
      py::arg("size") = 64, py::arg("levels") = 2, py::arg("strategy") = TreeStrategy::G1,
      py::arg("noise_level") = 0.05, py::arg("seed") = 0);
  m.def(
      "dynamic_deblur",
      [](Index size, Index frames, std::optional<Index> observed_frames, double noise_level, std::uint64_t seed) {
        return gen_dynamic_deblur({.size = size, .frames = frames,
                                   .observed_frames = observed_frames.value_or(frames),
                                   .noise_level = noise_level, .seed = seed});
      },
      py::arg("size") = 50, py::arg("frames") = 9, py::arg("observed_frames") = py::none(),
      py::arg("noise_level") = 0.02, py::arg("seed") = 0);
  m.def(
      "anomaly",
      [](Index grid, Index n_time, Index n_obs, double noise_level, std::uint64_t seed) {
        AnomalyOptions o;
        o.grid = grid;
        o.n_time = n_time;
        o.n_obs = n_obs;
        o.noise_level = noise_level;
        o.seed = seed;
        return gen_anomaly(o);
      },
      py::arg("grid") = 10, py::arg("n_time") = 8, py::arg("n_obs") = 1600, py::arg("noise_level") = 0.2,
      py::arg("seed") = 0);
  m.def("save_problem", &save_problem, py::arg("dir"), py::arg("problem"));
  m.def("load_problem", &load_problem, py::arg("dir"));

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("k", &IterationRecord::k)
      .def_readonly("lambda_", &IterationRecord::lambda)
      .def_readonly("alpha", &IterationRecord::alpha)
      .def_readonly("proj_residual", &IterationRecord::proj_residual)
      .def_readonly("full_residual", &IterationRecord::full_residual)
      .def_readonly("rel_error", &IterationRecord::rel_error)
      .def_readonly("group_norm", &IterationRecord::group_norm)
      .def_readonly("dp_reachable", &IterationRecord::dp_reachable);

  py::class_<SolverTrace>(m, "SolverTrace")
      .def_readonly("records", &SolverTrace::records)
      .def_readonly("x", &SolverTrace::x)
      .def_readonly("xi", &SolverTrace::xi)
      .def_readonly("s", &SolverTrace::s)
      .def_readonly("dp_target", &SolverTrace::dp_target)
      .def_property_readonly("iterations", &SolverTrace::iterations)
      .def_property_readonly("breakdown", [](const SolverTrace& t) { return t.breakdown.occurred; })
      .def("iterate", &reconstruct, py::arg("k"))
      .def_property_readonly("rel_errors", [](const SolverTrace& t) {
        std::vector<double> e;
        for (const auto& r : t.records) e.push_back(r.rel_error);
        return e;
      });

  m.def(
      "solve",
      [](const TestProblem& p, const std::string& solver, Index max_iters, std::optional<double> tau_lambda,
         const std::string& lambda_mode, double fixed_lambda, double gamma, std::optional<GroupStructure> groups,
         Index snapshot_every) {
        SolverConfig c = config_from_name(solver, max_iters, tau_lambda, lambda_mode, fixed_lambda, gamma,
                                          snapshot_every);
        c.groups = std::move(groups);
        py::gil_scoped_release release;
        return run(p, c);
      },
      py::arg("problem"), py::arg("solver"), py::arg("max_iters") = 50, py::arg("tau_lambda") = py::none(),
      py::arg("lambda_mode") = "dp", py::arg("fixed_lambda") = 0.0, py::arg("gamma") = 1.0,
      py::arg("groups") = py::none(), py::arg("snapshot_every") = 0);
  m.def("relative_error", &relative_error, py::arg("x"), py::arg("x_true"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::out_of_range& e) {
      PyErr_SetString(PyExc_IndexError, e.what());
    }
  });
}
