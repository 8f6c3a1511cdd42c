#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "mzlab/config.hpp"
#include "mzlab/envs.hpp"
#include "mzlab/mcts.hpp"
#include "mzlab/model.hpp"
#include "mzlab/nn.hpp"

namespace mzlab {

// One self-play episode. Index j of actions/rewards/policies/root_values
// belongs to the transition out of observations[j].
struct TrajectoryRecord {
  std::vector<Observation> observations;  // T + 1
  std::vector<std::size_t> actions;       // T
  Vector rewards;                         // T
  std::vector<Vector> search_policies;    // T
  Vector root_values;                     // T
  bool terminal = false;
  bool truncated = false;
  // Search value at the final observation of a truncated episode; 0 otherwise.
  double bootstrap_value = 0.0;
  std::size_t self_play_iteration = 0;

  std::size_t length() const { return actions.size(); }
  double total_reward() const;

  bool operator==(const TrajectoryRecord&) const = default;
};

SearchConfig search_config(const ExperimentConfig& config);

TrajectoryRecord self_play_episode(const ExperimentConfig& config, const MuZeroParams& params,
                                   const SearchConfig& search, Rng& rng);

// Self-play iterations are kept as bins; only the newest `window` bins survive.
class ReplayBuffer {
 public:
  struct Bin {
    std::size_t iteration = 0;
    std::vector<TrajectoryRecord> trajectories;

    bool operator==(const Bin&) const = default;
  };

  explicit ReplayBuffer(std::size_t window = 10) : window_(window) {}

  void add_iteration(std::size_t iteration, std::vector<TrajectoryRecord> trajectories);

  std::size_t window() const { return window_; }
  const std::deque<Bin>& bins() const { return bins_; }
  std::size_t trajectory_count() const;
  std::size_t position_count() const;
  bool empty() const { return position_count() == 0; }

  // Position p in [0, position_count()) in bin order.
  std::pair<const TrajectoryRecord*, std::size_t> locate(std::size_t position) const;
  std::vector<const TrajectoryRecord*> trajectories() const;

  bool operator==(const ReplayBuffer&) const = default;

 private:
  std::size_t window_;
  std::deque<Bin> bins_;
};

// n-step return from position t: discounted rewards for up to td_steps steps,
// then the stored root value, the truncation bootstrap, or nothing at a terminal.
double compute_value_target(const TrajectoryRecord& traj, std::size_t t, std::size_t td_steps,
                            double discount);

struct TrainTarget {
  Observation observation;                 // o_t
  std::vector<std::size_t> actions;        // a_{t+1..t+K}
  Vector rewards;                          // u_{t+1..t+K}
  Vector values;                           // z_{t..t+K}
  std::vector<Vector> policies;            // pi_{t..t+K}
  std::vector<Observation> future_observations;  // o_{t+1..t+K}; zeros where absorbing
  std::vector<std::uint8_t> absorbing;     // K + 1 flags; step k lies beyond the episode end
};

TrainTarget make_target(const TrajectoryRecord& traj, std::size_t t, std::size_t unroll_steps,
                        std::size_t td_steps, double discount, std::size_t action_count, Rng& rng);

std::vector<TrainTarget> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size,
                                      std::size_t unroll_steps, std::size_t td_steps,
                                      double discount, std::size_t action_count, Rng& rng);

enum class RegularizerMode { none, contrastive, decoder };

struct LossConfig {
  RegularizerMode mode = RegularizerMode::none;
  double omega = 1.0;
  Discrepancy discrepancy = Discrepancy::mse;
  bool scale_unroll_loss = true;
  bool halve_dynamics_gradient = true;
  double l2 = 1e-4;
};

LossConfig loss_config(const ExperimentConfig& config);

struct LossBreakdown {
  double reward_loss = 0.0;
  double value_loss = 0.0;
  double policy_loss = 0.0;
  double contrastive_loss = 0.0;
  double decoder_loss = 0.0;
  double l2_term = 0.0;
  // reward + value + policy + omega * active regularizer: the differentiated part.
  double objective = 0.0;
  double total = 0.0;  // objective + l2_term
};

// Batch-mean MuZero loss. When `grads` is non-null the objective is
// back-propagated into it (accumulating). The L2 term is reported here but its
// gradient is applied by adam_step. The contrastive targets h(o_{t+k}) come
// from `target_network` when given (frozen weights), else from `params`.
LossBreakdown muzero_loss(const MuZeroParams& params, std::span<const TrainTarget> batch,
                          const LossConfig& config, GradTape& tape, MuZeroParams* grads,
                          const MuZeroParams* target_network = nullptr);

// f on raw observations; value and policy at the root only.
LossBreakdown alphazero_loss(const MuZeroParams& params, std::span<const TrainTarget> batch,
                             const LossConfig& config, GradTape& tape, MuZeroParams* grads);

LossBreakdown compute_loss(const MuZeroParams& params, std::span<const TrainTarget> batch,
                           const LossConfig& config, MuZeroParams* grads,
                           const MuZeroParams* target_network = nullptr);

// Gradient of the objective over `batch`, then one Adam update.
LossBreakdown apply_gradient_step(MuZeroParams& params, AdamState& adam,
                                  std::span<const TrainTarget> batch, const LossConfig& loss,
                                  const AdamConfig& optimizer);

LossBreakdown train_step(MuZeroParams& params, AdamState& adam, const ReplayBuffer& buffer,
                         const ExperimentConfig& config, Rng& rng);

struct IterationMetrics {
  std::size_t iteration = 0;
  double mean_return = 0.0;
  double mean_episode_length = 0.0;
  LossBreakdown loss;  // mean over the iteration's train steps
  double wall_seconds = 0.0;
};

struct TrainingState {
  ExperimentConfig config;
  MuZeroParams params;
  AdamState adam;
  ReplayBuffer buffer;
  std::size_t iteration = 0;  // completed self-play iterations

  bool operator==(const TrainingState&) const = default;
};

ModelDims model_dims(const ExperimentConfig& config);
TrainingState init_training(const ExperimentConfig& config);

// Self-play episodes of the next iteration against the current weights.
std::vector<TrajectoryRecord> generate_episodes(const TrainingState& state);

// One self-play iteration: episodes -> buffer (with eviction) -> epochs of train steps.
IterationMetrics run_iteration(TrainingState& state);

inline constexpr const char* kMetricsHeader =
    "iteration,mean_return,mean_episode_length,reward_loss,value_loss,policy_loss,"
    "contrastive_loss,decoder_loss,total_loss,wall_seconds";
std::string format_metrics_row(const IterationMetrics& m);

struct RunOptions {
  // Stop after this many total iterations (defaults to config.self_play_iterations).
  std::size_t stop_after = 0;
  std::function<void(const IterationMetrics&)> on_iteration;
};

// Runs iterations until the configured count, appending rows to
// <output_dir>/metrics.csv and writing checkpoints to <output_dir>.
void run_training(TrainingState& state, const RunOptions& options = {});

struct EvaluationReport {
  Vector returns;
  double mean = 0.0;
  double stddev = 0.0;
};

// Greedy (most-visited) actions without root noise.
EvaluationReport evaluate(const ExperimentConfig& config, const MuZeroParams& params,
                          std::size_t episodes, std::uint64_t seed);

}  // namespace mzlab
