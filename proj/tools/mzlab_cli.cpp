// mzlab command-line front end.
//
//   mzlab train --config FILE [--seed N] [--out DIR] [--resume CKPT] [--set key=value]...
//   mzlab visualize --checkpoint FILE --trajectories N [--out DIR] [--seed N]
//   mzlab evaluate --checkpoint FILE --episodes N [--seed N]
//   mzlab gradcheck [--trials N] [--seed N] [--tolerance X]
//
// Exit status: 0 success, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mzlab/checkpoint.hpp"
#include "mzlab/config.hpp"
#include "mzlab/diagnostics.hpp"
#include "mzlab/latent_viz.hpp"
#include "mzlab/training.hpp"

namespace fs = std::filesystem;
using namespace mzlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string resume;
  std::vector<std::string> overrides;
  std::size_t stop_after = 0;
  bool quiet = false;
};

struct VisualizeArgs {
  std::string checkpoint;
  std::size_t trajectories = 0;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct EvaluateArgs {
  std::string checkpoint;
  std::size_t episodes = 0;
  std::optional<std::uint64_t> seed;
};

struct GradcheckArgs {
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double tolerance = 1e-5;
};

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

int cmd_train(const TrainArgs& a) {
  TrainingState state;
  if (!a.resume.empty()) {
    state = load_checkpoint(a.resume);
    std::printf("resuming from %s at iteration %zu\n", a.resume.c_str(), state.iteration);
  } else {
    ExperimentConfig cfg = load_config(a.config);
    apply_overrides(cfg, parse_overrides(a.overrides));
    if (a.seed) cfg.seed = *a.seed;
    if (!a.out.empty()) cfg.output_dir = a.out;
    state = init_training(cfg);
  }
  if (!a.resume.empty() && !a.out.empty()) state.config.output_dir = a.out;

  const ExperimentConfig& cfg = state.config;
  std::printf("training %s / %s, seed %llu, %zu iterations -> %s\n",
              std::string(to_string(cfg.env)).c_str(),
              std::string(to_string(cfg.algorithm)).c_str(),
              static_cast<unsigned long long>(cfg.seed), cfg.self_play_iterations,
              cfg.output_dir.c_str());
  RunOptions opts;
  opts.stop_after = a.stop_after;
  if (!a.quiet) {
    opts.on_iteration = [](const IterationMetrics& m) {
      std::printf("iter %4zu  return %8.2f  length %7.2f  loss %9.4f  (%.2fs)\n", m.iteration,
                  m.mean_return, m.mean_episode_length, m.loss.total, m.wall_seconds);
      std::fflush(stdout);
    };
  }
  run_training(state, opts);
  std::printf("done: %zu iterations, metrics in %s\n", state.iteration,
              (fs::path(cfg.output_dir) / "metrics.csv").string().c_str());
  return kExitOk;
}

int cmd_visualize(const VisualizeArgs& a) {
  const TrainingState state = load_checkpoint(a.checkpoint);
  const fs::path out = a.out.empty() ? fs::path(state.config.output_dir) / "viz" : fs::path(a.out);
  const std::uint64_t seed = a.seed.value_or(state.config.seed);
  const VisualizationSummary s = run_visualization(state, a.trajectories, seed, out);
  std::printf("%zu trajectories, %zu latent rows, mean h-vs-g divergence %.6f\n", s.trajectories,
              s.latent_rows, s.mean_divergence);
  std::printf("explained variance ratio:");
  for (double r : s.explained_variance_ratio) std::printf(" %.4f", r);
  std::printf("\n");
  for (const auto& f : s.files) std::printf("wrote %s\n", f.string().c_str());
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a) {
  const TrainingState state = load_checkpoint(a.checkpoint);
  const std::uint64_t seed = a.seed.value_or(state.config.seed);
  const EvaluationReport r = evaluate(state.config, state.params, a.episodes, seed);
  for (std::size_t e = 0; e < r.returns.size(); ++e) {
    std::printf("episode %zu return %.1f\n", e, r.returns[e]);
  }
  std::printf("episodes %zu mean %.3f std %.3f\n", r.returns.size(), r.mean, r.stddev);
  return kExitOk;
}

int cmd_gradcheck(const GradcheckArgs& a) {
  double worst = 0.0;
  std::size_t failures = 0;
  const auto cases = loss_check_cases(a.trials, a.seed);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const LossCheckCase& c = cases[i];
    const GradCheckReport r = check_loss_gradient(c, a.tolerance);
    const char* mode = c.mode == RegularizerMode::none          ? "none"
                       : c.mode == RegularizerMode::contrastive ? "contrastive"
                                                                : "decoder";
    std::printf("trial %2zu  %-11s %-6s L=%zu K=%zu  params %5zu  max rel err %.3e  %s\n", i, mode,
                std::string(to_string(c.discrepancy)).c_str(), c.latent_size, c.unroll_steps,
                r.checked, r.max_relative_error, r.passed() ? "ok" : "FAIL");
    worst = std::max(worst, r.max_relative_error);
    if (!r.passed()) ++failures;
  }
  std::printf("worst relative error %.3e over %zu trials, %zu failed (tolerance %.1e)\n", worst,
              cases.size(), failures, a.tolerance);
  return failures == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mzlab: MuZero latent-model experiments on classic control tasks"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "run self-play training from a config file");
  auto* config_opt = t->add_option("--config", train.config, "config file (section.key = value)");
  t->add_option("--seed", train.seed, "override run.seed");
  t->add_option("--out", train.out, "override run.output_dir");
  auto* resume_opt = t->add_option("--resume", train.resume, "continue from a checkpoint");
  t->add_option("--set", train.overrides, "extra key=value overrides")->excludes(resume_opt);
  t->add_option("--iterations", train.stop_after, "stop after this many total iterations");
  t->add_flag("--quiet", train.quiet, "suppress per-iteration lines");
  config_opt->excludes(resume_opt);
  resume_opt->check(CLI::ExistingFile);
  config_opt->check(CLI::ExistingFile);

  VisualizeArgs viz;
  auto* v = app.add_subcommand("visualize", "export latent trajectories, PCA projection and plots");
  v->add_option("--checkpoint", viz.checkpoint)->required()->check(CLI::ExistingFile);
  v->add_option("--trajectories", viz.trajectories)->required()->check(CLI::PositiveNumber);
  v->add_option("--out", viz.out, "output directory (default <run>/viz)");
  v->add_option("--seed", viz.seed, "trajectory sampling seed (default: run seed)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "greedy evaluation without exploration noise");
  e->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
  e->add_option("--episodes", ev.episodes)->required()->check(CLI::PositiveNumber);
  e->add_option("--seed", ev.seed, "evaluation seed (default: run seed)");

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "compare loss gradients with finite differences");
  g->add_option("--trials", gc.trials)->check(CLI::PositiveNumber);
  g->add_option("--seed", gc.seed);
  g->add_option("--tolerance", gc.tolerance)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
    if (t->parsed() && train.config.empty() && train.resume.empty()) {
      throw CLI::RequiredError("train needs --config or --resume");
    }
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (t->parsed()) return cmd_train(train);
    if (v->parsed()) return cmd_visualize(viz);
    if (e->parsed()) return cmd_evaluate(ev);
    if (g->parsed()) return cmd_gradcheck(gc);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
