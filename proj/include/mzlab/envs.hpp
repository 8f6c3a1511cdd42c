#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mzlab/rng.hpp"
#include "mzlab/tensor.hpp"

namespace mzlab {

enum class EnvKind { cartpole, mountaincar };

std::string_view to_string(EnvKind kind);
EnvKind env_kind_from_string(std::string_view name);

struct EnvSpec {
  EnvKind kind;
  std::size_t action_count;
  std::size_t obs_dim;
  std::size_t max_steps;
};

EnvSpec env_spec(EnvKind kind);

using Observation = Vector;

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;
};

// Raised when stepping an episode that has already ended, or on a bad action.
class EnvError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace cartpole {
inline constexpr double kGravity = 9.8;
inline constexpr double kCartMass = 1.0;
inline constexpr double kPoleMass = 0.1;
inline constexpr double kHalfLength = 0.5;
inline constexpr double kForce = 10.0;
inline constexpr double kDt = 0.02;
inline constexpr double kXLimit = 2.4;
inline constexpr double kThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
}  // namespace cartpole

namespace mountaincar {
inline constexpr double kMinPosition = -1.2;
inline constexpr double kMaxPosition = 0.6;
inline constexpr double kMaxSpeed = 0.07;
inline constexpr double kGoalPosition = 0.5;
inline constexpr double kForce = 0.001;
inline constexpr double kGravity = 0.0025;
}  // namespace mountaincar

// Observation: cart position, cart velocity, pole angle, pole angular velocity.
Observation cartpole_reset(Rng& rng);
bool cartpole_is_terminal(const Observation& state);
// Single Euler step. Never sets `truncated`; time limits are tracked by Environment.
StepResult cartpole_step(const Observation& state, int action);

// Observation: position, velocity.
Observation mountaincar_reset(Rng& rng);
bool mountaincar_is_terminal(const Observation& state);
StepResult mountaincar_step(const Observation& state, int action);

Observation reset(EnvKind kind, Rng& rng);
StepResult transition(EnvKind kind, const Observation& state, int action);

// One episode of an environment: step counting, truncation, and end-of-episode checks.
class Environment {
 public:
  explicit Environment(EnvKind kind, std::size_t max_steps = 0);

  const EnvSpec& spec() const { return spec_; }
  const Observation& observation() const { return state_; }
  std::size_t steps() const { return steps_; }
  bool done() const { return done_; }

  Observation reset(Rng& rng);
  StepResult step(int action);

 private:
  EnvSpec spec_;
  Observation state_;
  std::size_t steps_ = 0;
  bool done_ = true;
};

}  // namespace mzlab
