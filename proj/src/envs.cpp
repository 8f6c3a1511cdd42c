#include "mzlab/envs.hpp"

#include <algorithm>
#include <cmath>

namespace mzlab {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::cartpole:
      return "cartpole";
    case EnvKind::mountaincar:
      return "mountaincar";
  }
  return "unknown";
}

EnvKind env_kind_from_string(std::string_view name) {
  if (name == "cartpole") return EnvKind::cartpole;
  if (name == "mountaincar") return EnvKind::mountaincar;
  throw std::invalid_argument("unknown environment '" + std::string(name) + "'");
}

EnvSpec env_spec(EnvKind kind) {
  switch (kind) {
    case EnvKind::cartpole:
      return {kind, 2, 4, 500};
    case EnvKind::mountaincar:
      return {kind, 3, 2, 200};
  }
  throw std::invalid_argument("env_spec: bad kind");
}

Observation cartpole_reset(Rng& rng) {
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  Observation obs(4);
  for (double& v : obs) v = dist(rng);
  return obs;
}

bool cartpole_is_terminal(const Observation& s) {
  return s[0] < -cartpole::kXLimit || s[0] > cartpole::kXLimit || s[2] < -cartpole::kThetaLimit ||
         s[2] > cartpole::kThetaLimit;
}

StepResult cartpole_step(const Observation& state, int action) {
  using namespace cartpole;
  if (state.size() != 4) throw EnvError("cartpole_step: expected a 4-dimensional state");
  if (action != 0 && action != 1) throw EnvError("cartpole_step: action must be 0 or 1");
  if (cartpole_is_terminal(state)) throw EnvError("cartpole_step: state is already terminal");

  const double x = state[0], x_dot = state[1], theta = state[2], theta_dot = state[3];
  const double total_mass = kCartMass + kPoleMass;
  const double pole_mass_length = kPoleMass * kHalfLength;
  const double force = action == 1 ? kForce : -kForce;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);

  const double temp = (force + pole_mass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                           (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  StepResult out;
  out.observation = {x + kDt * x_dot, x_dot + kDt * x_acc, theta + kDt * theta_dot,
                     theta_dot + kDt * theta_acc};
  out.reward = 1.0;
  out.terminal = cartpole_is_terminal(out.observation);
  return out;
}

Observation mountaincar_reset(Rng& rng) {
  std::uniform_real_distribution<double> dist(-0.6, -0.4);
  return {dist(rng), 0.0};
}

bool mountaincar_is_terminal(const Observation& s) { return s[0] >= mountaincar::kGoalPosition; }

StepResult mountaincar_step(const Observation& state, int action) {
  using namespace mountaincar;
  if (state.size() != 2) throw EnvError("mountaincar_step: expected a 2-dimensional state");
  if (action < 0 || action > 2) throw EnvError("mountaincar_step: action must be 0, 1 or 2");
  if (mountaincar_is_terminal(state)) throw EnvError("mountaincar_step: state is already terminal");

  double position = state[0];
  double velocity = state[1];
  velocity += (action - 1) * kForce - kGravity * std::cos(3.0 * position);
  velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
  position += velocity;
  position = std::clamp(position, kMinPosition, kMaxPosition);
  if (position == kMinPosition && velocity < 0.0) velocity = 0.0;

  StepResult out;
  out.observation = {position, velocity};
  out.reward = -1.0;
  out.terminal = mountaincar_is_terminal(out.observation);
  return out;
}

Observation reset(EnvKind kind, Rng& rng) {
  return kind == EnvKind::cartpole ? cartpole_reset(rng) : mountaincar_reset(rng);
}

StepResult transition(EnvKind kind, const Observation& state, int action) {
  return kind == EnvKind::cartpole ? cartpole_step(state, action) : mountaincar_step(state, action);
}

Environment::Environment(EnvKind kind, std::size_t max_steps) : spec_(env_spec(kind)) {
  if (max_steps != 0) spec_.max_steps = max_steps;
}

Observation Environment::reset(Rng& rng) {
  state_ = mzlab::reset(spec_.kind, rng);
  steps_ = 0;
  done_ = false;
  return state_;
}

StepResult Environment::step(int action) {
  if (done_) throw EnvError("Environment::step called after the episode ended");
  StepResult r = transition(spec_.kind, state_, action);
  ++steps_;
  if (!r.terminal && steps_ >= spec_.max_steps) r.truncated = true;
  state_ = r.observation;
  done_ = r.terminal || r.truncated;
  return r;
}

}  // namespace mzlab
