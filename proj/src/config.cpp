#include "mzlab/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace mzlab {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::muzero:
      return "muzero";
    case Algorithm::muzero_contrastive:
      return "muzero_contrastive";
    case Algorithm::muzero_decoder:
      return "muzero_decoder";
    case Algorithm::alphazero:
      return "alphazero";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (Algorithm a : {Algorithm::muzero, Algorithm::muzero_contrastive, Algorithm::muzero_decoder,
                      Algorithm::alphazero}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Discrepancy d) { return d == Discrepancy::mse ? "mse" : "cosine"; }

Discrepancy discrepancy_from_string(std::string_view name) {
  if (name == "mse") return Discrepancy::mse;
  if (name == "cosine") return Discrepancy::cosine;
  throw ConfigError("unknown discrepancy '" + std::string(name) + "'");
}

ExperimentConfig default_config(EnvKind env) {
  ExperimentConfig c;
  c.env = env;
  if (env == EnvKind::cartpole) {
    c.self_play_iterations = 80;
    c.max_steps = 500;
    c.td_steps = 10;
    c.support_size = 15;
  } else {
    c.self_play_iterations = 1000;
    c.max_steps = 200;
    c.td_steps = 50;
    c.support_size = 20;
  }
  return c;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::size_t parse_count(std::string_view v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_real(std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("expected a real number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true/false, got '" + std::string(v) + "'");
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Key {
  const char* name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define MZ_COUNT(key, field)                                                           \
  Key {                                                                                \
    key, [](ExperimentConfig& c, std::string_view v) { c.field = parse_count(v); },    \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }              \
  }
#define MZ_REAL(key, field)                                                            \
  Key {                                                                                \
    key, [](ExperimentConfig& c, std::string_view v) { c.field = parse_real(v); },     \
        [](const ExperimentConfig& c) { return format_real(c.field); }                 \
  }
#define MZ_BOOL(key, field)                                                            \
  Key {                                                                                \
    key, [](ExperimentConfig& c, std::string_view v) { c.field = parse_bool(v); },     \
        [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); } \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"env.name", [](ExperimentConfig& c, std::string_view v) { c.env = env_kind_from_string(v); },
          [](const ExperimentConfig& c) { return std::string(to_string(c.env)); }},
      Key{"algorithm.name",
          [](ExperimentConfig& c, std::string_view v) { c.algorithm = algorithm_from_string(v); },
          [](const ExperimentConfig& c) { return std::string(to_string(c.algorithm)); }},
      MZ_COUNT("model.latent_size", latent_size),
      MZ_COUNT("model.hidden_size", hidden_size),
      MZ_COUNT("model.support_size", support_size),
      MZ_COUNT("model.unroll_steps", unroll_steps),
      MZ_REAL("regularizer.omega", omega),
      Key{"regularizer.discrepancy",
          [](ExperimentConfig& c, std::string_view v) { c.discrepancy = discrepancy_from_string(v); },
          [](const ExperimentConfig& c) { return std::string(to_string(c.discrepancy)); }},
      MZ_COUNT("selfplay.iterations", self_play_iterations),
      MZ_COUNT("selfplay.episodes", episodes),
      MZ_COUNT("selfplay.max_steps", max_steps),
      MZ_COUNT("mcts.simulations", simulations),
      MZ_REAL("mcts.c1", c1),
      MZ_REAL("mcts.c2", c2),
      MZ_REAL("mcts.dirichlet_alpha", dirichlet_alpha),
      MZ_REAL("mcts.exploration_fraction", exploration_fraction),
      MZ_REAL("mcts.temperature", temperature),
      MZ_COUNT("replay.window", window),
      MZ_COUNT("replay.td_steps", td_steps),
      MZ_REAL("replay.discount", discount),
      MZ_COUNT("train.epochs", epochs),
      MZ_COUNT("train.batch_size", batch_size),
      MZ_REAL("train.learning_rate", learning_rate),
      MZ_REAL("train.l2", l2),
      MZ_BOOL("train.scale_unroll_loss", scale_unroll_loss),
      MZ_BOOL("train.halve_dynamics_gradient", halve_dynamics_gradient),
      Key{"run.seed", [](ExperimentConfig& c, std::string_view v) { c.seed = parse_count(v); },
          [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      Key{"run.output_dir", [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(v); },
          [](const ExperimentConfig& c) { return c.output_dir; }},
      MZ_COUNT("run.checkpoint_every", checkpoint_every),
      MZ_COUNT("run.threads", threads),
      MZ_BOOL("run.log_wall_time", log_wall_time),
  };
  return table;
}

#undef MZ_COUNT
#undef MZ_REAL
#undef MZ_BOOL

const Key* find_key(std::string_view name) {
  for (const Key& k : keys()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

}  // namespace

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  require(c.latent_size >= 1, "model.latent_size must be >= 1");
  require(c.hidden_size >= 1, "model.hidden_size must be >= 1");
  require(c.support_size >= 2, "model.support_size must be >= 2");
  require(c.omega >= 0.0, "regularizer.omega must be >= 0");
  require(c.self_play_iterations >= 1, "selfplay.iterations must be >= 1");
  require(c.episodes >= 1, "selfplay.episodes must be >= 1");
  require(c.max_steps >= 1, "selfplay.max_steps must be >= 1");
  require(c.simulations >= 1, "mcts.simulations must be >= 1");
  require(c.c1 >= 0.0, "mcts.c1 must be >= 0");
  require(c.c2 > 0.0, "mcts.c2 must be > 0");
  require(c.dirichlet_alpha > 0.0, "mcts.dirichlet_alpha must be > 0");
  require(c.exploration_fraction >= 0.0 && c.exploration_fraction <= 1.0,
          "mcts.exploration_fraction must lie in [0, 1]");
  require(c.temperature >= 0.0, "mcts.temperature must be >= 0");
  require(c.window >= 1, "replay.window must be >= 1");
  require(c.td_steps >= 1, "replay.td_steps must be >= 1");
  require(c.discount > 0.0 && c.discount <= 1.0, "replay.discount must lie in (0, 1]");
  require(c.epochs >= 1, "train.epochs must be >= 1");
  require(c.batch_size >= 1, "train.batch_size must be >= 1");
  require(c.learning_rate > 0.0, "train.learning_rate must be > 0");
  require(c.l2 >= 0.0, "train.l2 must be >= 0");
  require(c.checkpoint_every >= 1, "run.checkpoint_every must be >= 1");
  require(c.threads >= 1, "run.threads must be >= 1");
  require(!c.output_dir.empty(), "run.output_dir must not be empty");
}

void apply_overrides(ExperimentConfig& config, const std::map<std::string, std::string>& overrides) {
  for (const auto& [name, value] : overrides) {
    if (name == "env.name") continue;
    const Key* key = find_key(name);
    if (!key) throw ConfigError("unknown config key '" + name + "'");
    key->set(config, value);
  }
  validate(config);
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> pairs;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    auto fail = [&](const std::string& what) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + what);
    };
    if (eq == std::string_view::npos) fail("expected 'section.key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.find('.') == std::string::npos) fail("key '" + key + "' has no section");
    if (!find_key(key)) fail("unknown config key '" + key + "'");
    if (value.empty()) fail("empty value for '" + key + "'");
    if (pairs.count(key)) fail("duplicate key '" + key + "'");
    try {
      // Values are checked here so that errors carry a line number.
      ExperimentConfig scratch;
      find_key(key)->set(scratch, value);
    } catch (const std::exception& e) {
      fail(e.what());
    }
    pairs.emplace(key, value);
  }
  EnvKind env = EnvKind::cartpole;
  if (auto it = pairs.find("env.name"); it != pairs.end()) env = env_kind_from_string(it->second);
  ExperimentConfig config = default_config(env);
  apply_overrides(config, pairs);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const Key& k : keys()) {
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += '\n';
  }
  return out;
}

}  // namespace mzlab
