#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mzlab/envs.hpp"

namespace mzlab {

enum class Algorithm { muzero, muzero_contrastive, muzero_decoder, alphazero };
enum class Discrepancy { mse, cosine };

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);
std::string_view to_string(Discrepancy d);
Discrepancy discrepancy_from_string(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  EnvKind env = EnvKind::cartpole;
  Algorithm algorithm = Algorithm::muzero;

  // model
  std::size_t latent_size = 8;
  std::size_t hidden_size = 32;
  std::size_t support_size = 15;
  std::size_t unroll_steps = 5;

  // regularizer
  double omega = 1.0;
  Discrepancy discrepancy = Discrepancy::mse;

  // self-play
  std::size_t self_play_iterations = 80;
  std::size_t episodes = 20;
  std::size_t max_steps = 500;

  // search
  std::size_t simulations = 11;
  double c1 = 1.25;
  double c2 = 19652.0;
  double dirichlet_alpha = 0.25;
  double exploration_fraction = 0.25;
  double temperature = 1.0;

  // replay
  std::size_t window = 10;
  std::size_t td_steps = 10;
  double discount = 0.997;

  // optimisation
  std::size_t epochs = 40;
  std::size_t batch_size = 128;
  double learning_rate = 2e-2;
  double l2 = 1e-4;
  bool scale_unroll_loss = true;
  bool halve_dynamics_gradient = true;

  // run
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  std::size_t checkpoint_every = 10;
  std::size_t threads = 1;
  bool log_wall_time = true;

  bool operator==(const ExperimentConfig&) const = default;
};

// Hyperparameter defaults for one environment column (CartPole or MountainCar).
ExperimentConfig default_config(EnvKind env);

// Flat `section.key = value` text; `#` starts a comment. `env.name` selects the
// default column before any other key applies, whatever its position.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Applies `section.key=value` overrides on top of an existing config.
void apply_overrides(ExperimentConfig& config, const std::map<std::string, std::string>& overrides);
// Serializes every key; parse_config(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

}  // namespace mzlab
