// Python bindings for the mzlab core. Vectors cross as lists of floats.

#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mzlab/checkpoint.hpp"
#include "mzlab/config.hpp"
#include "mzlab/diagnostics.hpp"
#include "mzlab/envs.hpp"
#include "mzlab/latent_viz.hpp"
#include "mzlab/model.hpp"
#include "mzlab/training.hpp"

namespace py = pybind11;
using namespace mzlab;

namespace {

std::vector<Vector> rows_of(const Tensor2& t) {
  std::vector<Vector> out(t.rows);
  for (std::size_t r = 0; r < t.rows; ++r) {
    out[r].assign(t.values.begin() + r * t.cols, t.values.begin() + (r + 1) * t.cols);
  }
  return out;
}

Tensor2 from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Tensor2 t(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != t.cols) throw ShapeError("ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), t.values.begin() + r * t.cols);
  }
  return t;
}

ExperimentConfig make_config(const std::string& env, const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg = default_config(env_kind_from_string(env));
  apply_overrides(cfg, overrides);
  validate(cfg);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_mzlab, m) {
  m.doc() = "MuZero latent-model experiments on classic control tasks";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);
  py::register_exception<EnvError>(m, "EnvError", PyExc_RuntimeError);

  // Environments.
  py::class_<StepResult>(m, "StepResult")
      .def_readonly("observation", &StepResult::observation)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("terminal", &StepResult::terminal)
      .def_readonly("truncated", &StepResult::truncated);
  m.def("env_spec", [](const std::string& env) {
    const EnvSpec s = env_spec(env_kind_from_string(env));
    return py::dict(py::arg("action_count") = s.action_count, py::arg("obs_dim") = s.obs_dim,
                    py::arg("max_steps") = s.max_steps);
  });
  m.def("reset", [](const std::string& env, std::uint64_t seed) {
    Rng rng(seed);
    return reset(env_kind_from_string(env), rng);
  }, py::arg("env"), py::arg("seed"));
  m.def("transition", [](const std::string& env, const Observation& state, int action) {
    return transition(env_kind_from_string(env), state, action);
  }, py::arg("env"), py::arg("state"), py::arg("action"),
        "Pure dynamics step: next state, reward and terminal flag (no truncation).");

  // Support codec.
  m.def("linear_anchors", &linear_anchors, py::arg("lo"), py::arg("hi"), py::arg("count"));
  m.def("scalar_to_support", [](double x, const Vector& anchors) {
    return scalar_to_support(x, anchors).probabilities;
  }, py::arg("x"), py::arg("anchors"));
  m.def("support_to_scalar", [](const Vector& probs, const Vector& anchors) {
    return support_to_scalar(SupportDistribution{probs, anchors});
  }, py::arg("probs"), py::arg("anchors"));

  // PCA.
  m.def("fit_pca", [](const std::vector<Vector>& data, std::size_t n) {
    const PcaModel p = fit_pca(from_rows(data), n);
    return py::dict(py::arg("mean") = p.mean, py::arg("components") = p.components,
                    py::arg("explained_variance") = p.explained_variance,
                    py::arg("explained_variance_ratio") = p.explained_variance_ratio);
  }, py::arg("data"), py::arg("n_components") = 3);

  // Configs.
  m.def("config_text", [](const std::string& env, const std::map<std::string, std::string>& o) {
    return to_config_text(make_config(env, o));
  }, py::arg("env"), py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("parse_config", [](const std::string& text) { return to_config_text(parse_config(text)); },
        py::arg("text"), "Validate config text and return it in canonical form.");

  py::class_<IterationMetrics>(m, "IterationMetrics")
      .def_readonly("iteration", &IterationMetrics::iteration)
      .def_readonly("mean_return", &IterationMetrics::mean_return)
      .def_readonly("mean_episode_length", &IterationMetrics::mean_episode_length)
      .def_property_readonly("total_loss", [](const IterationMetrics& x) { return x.loss.total; });

  py::class_<TrainingState>(m, "Trainer")
      .def(py::init([](const std::string& text) { return init_training(parse_config(text)); }),
           py::arg("config_text"))
      .def_static("load", [](const std::filesystem::path& p) { return load_checkpoint(p); })
      .def("save", [](const TrainingState& s, const std::filesystem::path& p) { save_checkpoint(p, s); })
      .def_readonly("iteration", &TrainingState::iteration)
      .def_property_readonly("config_text", [](const TrainingState& s) { return to_config_text(s.config); })
      .def_property_readonly("parameter_count", [](const TrainingState& s) { return parameter_count(s.params); })
      .def("run_iteration", [](TrainingState& s) {
        py::gil_scoped_release nogil;
        return run_iteration(s);
      })
      .def("train", [](TrainingState& s, std::size_t stop_after) {
        py::gil_scoped_release nogil;
        RunOptions o;
        o.stop_after = stop_after;
        run_training(s, o);
      }, py::arg("stop_after") = 0, "Run to completion (or `stop_after` total iterations), writing checkpoints and metrics.")
      .def("evaluate", [](const TrainingState& s, std::size_t episodes, std::uint64_t seed) {
        return evaluate(s.config, s.params, episodes, seed).returns;
      }, py::arg("episodes"), py::arg("seed"))
      .def("mean_divergence", [](const TrainingState& s, std::size_t count, std::uint64_t seed) {
        const auto trajs = sample_trajectories(s.config, s.params, count, seed);
        return mean_divergence(s.params, trajs);
      }, py::arg("trajectories"), py::arg("seed"))
      .def("visualize", [](const TrainingState& s, std::size_t count, std::uint64_t seed,
                           const std::filesystem::path& out) {
        const VisualizationSummary v = run_visualization(s, count, seed, out);
        return py::dict(py::arg("latent_rows") = v.latent_rows,
                        py::arg("mean_divergence") = v.mean_divergence,
                        py::arg("explained_variance_ratio") = v.explained_variance_ratio,
                        py::arg("files") = v.files);
      }, py::arg("trajectories"), py::arg("seed"), py::arg("out_dir"));

  m.def("gradcheck", [](std::size_t trials, std::uint64_t seed) {
    double worst = 0.0;
    for (const LossCheckCase& c : loss_check_cases(trials, seed)) {
      worst = std::max(worst, check_loss_gradient(c).max_relative_error);
    }
    return worst;
  }, py::arg("trials") = 5, py::arg("seed") = 0, "Worst relative gradient error over random loss instances.");
}
