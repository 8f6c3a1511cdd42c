#include "mzlab/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "mzlab/checkpoint.hpp"

namespace mzlab {

double TrajectoryRecord::total_reward() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

SearchConfig search_config(const ExperimentConfig& c) {
  SearchConfig s;
  s.simulations = c.simulations;
  s.c1 = c.c1;
  s.c2 = c.c2;
  s.discount = c.discount;
  s.dirichlet_alpha = c.dirichlet_alpha;
  s.exploration_fraction = c.exploration_fraction;
  s.temperature = c.temperature;
  s.root_noise = true;
  return s;
}

namespace {

SearchResult search_from(const ExperimentConfig& config, const MuZeroParams& params,
                         const Observation& obs, const SearchConfig& search, Rng& rng) {
  if (params.dims.alphazero) return run_search_alphazero(params, config.env, obs, search, rng);
  return run_search(params, obs, search, rng);
}

}  // namespace

TrajectoryRecord self_play_episode(const ExperimentConfig& config, const MuZeroParams& params,
                                   const SearchConfig& search, Rng& rng) {
  Environment env(config.env, config.max_steps);
  TrajectoryRecord rec;
  rec.observations.push_back(env.reset(rng));
  while (!env.done()) {
    const SearchResult sr = search_from(config, params, env.observation(), search, rng);
    const StepResult step = env.step(static_cast<int>(sr.chosen_action));
    rec.actions.push_back(sr.chosen_action);
    rec.rewards.push_back(step.reward);
    rec.search_policies.push_back(sr.visit_policy);
    rec.root_values.push_back(sr.root_value);
    rec.observations.push_back(step.observation);
    rec.terminal = step.terminal;
    rec.truncated = step.truncated;
  }
  if (rec.truncated) {
    rec.bootstrap_value = search_from(config, params, rec.observations.back(), search, rng).root_value;
  }
  return rec;
}

// ---------------------------------------------------------------------------

void ReplayBuffer::add_iteration(std::size_t iteration, std::vector<TrajectoryRecord> trajectories) {
  bins_.push_back(Bin{iteration, std::move(trajectories)});
  while (bins_.size() > window_) bins_.pop_front();
}

std::size_t ReplayBuffer::trajectory_count() const {
  std::size_t n = 0;
  for (const Bin& b : bins_) n += b.trajectories.size();
  return n;
}

std::size_t ReplayBuffer::position_count() const {
  std::size_t n = 0;
  for (const Bin& b : bins_)
    for (const auto& t : b.trajectories) n += t.length();
  return n;
}

std::pair<const TrajectoryRecord*, std::size_t> ReplayBuffer::locate(std::size_t position) const {
  for (const Bin& b : bins_) {
    for (const auto& t : b.trajectories) {
      if (position < t.length()) return {&t, position};
      position -= t.length();
    }
  }
  throw std::out_of_range("ReplayBuffer::locate: position beyond buffer");
}

std::vector<const TrajectoryRecord*> ReplayBuffer::trajectories() const {
  std::vector<const TrajectoryRecord*> out;
  for (const Bin& b : bins_)
    for (const auto& t : b.trajectories) out.push_back(&t);
  return out;
}

// ---------------------------------------------------------------------------

double compute_value_target(const TrajectoryRecord& traj, std::size_t t, std::size_t td_steps,
                            double discount) {
  const std::size_t T = traj.length();
  if (t >= T) throw std::out_of_range("compute_value_target: position beyond episode");
  const std::size_t horizon = std::min(td_steps, T - t);
  double value = 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < horizon; ++i) {
    value += scale * traj.rewards[t + i];
    scale *= discount;
  }
  if (t + td_steps < T) {
    value += scale * traj.root_values[t + td_steps];
  } else if (traj.truncated) {
    value += scale * traj.bootstrap_value;
  }
  return value;
}

TrainTarget make_target(const TrajectoryRecord& traj, std::size_t t, std::size_t unroll_steps,
                        std::size_t td_steps, double discount, std::size_t action_count, Rng& rng) {
  const std::size_t T = traj.length();
  if (t >= T) throw std::out_of_range("make_target: position beyond episode");
  const std::size_t obs_dim = traj.observations.front().size();
  const Vector uniform(action_count, 1.0 / static_cast<double>(action_count));
  std::uniform_int_distribution<std::size_t> random_action(0, action_count - 1);

  TrainTarget target;
  target.observation = traj.observations[t];
  for (std::size_t k = 0; k <= unroll_steps; ++k) {
    const std::size_t j = t + k;
    const bool absorbing = j >= T;
    target.absorbing.push_back(absorbing ? 1 : 0);
    target.values.push_back(absorbing ? 0.0 : compute_value_target(traj, j, td_steps, discount));
    target.policies.push_back(absorbing ? uniform : traj.search_policies[j]);
    if (k == 0) continue;
    const std::size_t a = j - 1;  // transition into step k
    const bool within = a < T;
    target.actions.push_back(within ? traj.actions[a] : random_action(rng));
    target.rewards.push_back(within ? traj.rewards[a] : 0.0);
    target.future_observations.push_back(absorbing ? Observation(obs_dim, 0.0) : traj.observations[j]);
  }
  return target;
}

std::vector<TrainTarget> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size,
                                      std::size_t unroll_steps, std::size_t td_steps,
                                      double discount, std::size_t action_count, Rng& rng) {
  const std::size_t positions = buffer.position_count();
  if (positions == 0) throw std::logic_error("sample_batch: replay buffer is empty");
  std::uniform_int_distribution<std::size_t> pick(0, positions - 1);
  std::vector<TrainTarget> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto [traj, t] = buffer.locate(pick(rng));
    batch.push_back(make_target(*traj, t, unroll_steps, td_steps, discount, action_count, rng));
  }
  return batch;
}

// ---------------------------------------------------------------------------

LossConfig loss_config(const ExperimentConfig& c) {
  LossConfig l;
  switch (c.algorithm) {
    case Algorithm::muzero_contrastive:
      l.mode = RegularizerMode::contrastive;
      break;
    case Algorithm::muzero_decoder:
      l.mode = RegularizerMode::decoder;
      break;
    default:
      l.mode = RegularizerMode::none;
  }
  l.omega = c.omega;
  l.discrepancy = c.discrepancy;
  l.scale_unroll_loss = c.scale_unroll_loss;
  l.halve_dynamics_gradient = c.halve_dynamics_gradient;
  l.l2 = c.l2;
  return l;
}

namespace {

Tensor2 support_rows(std::span<const TrainTarget> batch, const Vector& anchors,
                     const std::function<double(const TrainTarget&)>& pick) {
  Tensor2 out(batch.size(), anchors.size());
  for (std::size_t r = 0; r < batch.size(); ++r) scalar_to_support(pick(batch[r]), anchors, out.row_span(r));
  return out;
}

Tensor2 stack(std::span<const TrainTarget> batch, std::size_t cols,
              const std::function<std::span<const double>(const TrainTarget&)>& pick) {
  Tensor2 out(batch.size(), cols);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    auto src = pick(batch[r]);
    if (src.size() != cols) throw ShapeError("training target width mismatch");
    std::copy(src.begin(), src.end(), out.row_span(r).begin());
  }
  return out;
}

VarId accumulate(GradTape& tape, const std::vector<VarId>& terms) {
  VarId acc = tape.constant(Tensor2(1, 1, 0.0));
  for (VarId t : terms) acc = tape.add(acc, t);
  return acc;
}

}  // namespace

LossBreakdown muzero_loss(const MuZeroParams& params, std::span<const TrainTarget> batch,
                          const LossConfig& config, GradTape& tape, MuZeroParams* grads,
                          const MuZeroParams* target_network) {
  if (batch.empty()) throw std::invalid_argument("muzero_loss: empty batch");
  if (config.mode == RegularizerMode::decoder && !params.decoder) {
    throw std::logic_error("muzero_loss: decoder regularizer requires a decoder network");
  }
  const ModelDims& dims = params.dims;
  const std::size_t B = batch.size();
  const std::size_t K = batch.front().actions.size();
  for (const auto& t : batch) {
    if (t.actions.size() != K) throw ShapeError("muzero_loss: mixed unroll lengths in batch");
  }

  std::vector<Tensor2> hots;
  for (std::size_t k = 0; k < K; ++k) {
    Tensor2 h(B, dims.action_count);
    for (std::size_t r = 0; r < B; ++r) h(r, batch[r].actions[k]) = 1.0;
    hots.push_back(std::move(h));
  }

  UnrollOptions opts;
  opts.dynamics_gradient_scale = config.halve_dynamics_gradient ? 0.5 : 1.0;
  opts.decode = config.mode == RegularizerMode::decoder;
  const VarId obs = tape.constant(stack(batch, dims.obs_dim, [](const TrainTarget& t) {
    return std::span<const double>(t.observation);
  }));
  const UnrollVars uv = unroll(params, obs, hots, tape, grads, opts);

  auto step_weight = [&](std::size_t k) {
    const double w = (k == 0 || !config.scale_unroll_loss) ? 1.0 : 1.0 / static_cast<double>(K);
    return w / static_cast<double>(B);
  };
  auto masked_weights = [&](std::size_t k) {
    Vector w(B, step_weight(k));
    for (std::size_t r = 0; r < B; ++r)
      if (batch[r].absorbing[k]) w[r] = 0.0;
    return w;
  };

  std::vector<VarId> reward_terms, value_terms, policy_terms, reg_terms;
  for (std::size_t k = 0; k <= K; ++k) {
    const Vector w(B, step_weight(k));
    const Tensor2 value_target =
        support_rows(batch, dims.value_anchors, [k](const TrainTarget& t) { return t.values[k]; });
    const Tensor2 policy_target = stack(batch, dims.action_count, [k](const TrainTarget& t) {
      return std::span<const double>(t.policies[k]);
    });
    value_terms.push_back(tape.softmax_cross_entropy(uv.value_logits[k], value_target, w));
    policy_terms.push_back(tape.softmax_cross_entropy(uv.policy_logits[k], policy_target, w));
    if (k > 0) {
      const Tensor2 reward_target = support_rows(
          batch, dims.reward_anchors, [k](const TrainTarget& t) { return t.rewards[k - 1]; });
      reward_terms.push_back(tape.softmax_cross_entropy(uv.reward_logits[k - 1], reward_target, w));
    }
  }

  if (config.mode == RegularizerMode::contrastive) {
    for (std::size_t k = 1; k <= K; ++k) {
      const VarId future = tape.constant(stack(batch, dims.obs_dim, [k](const TrainTarget& t) {
        return std::span<const double>(t.future_observations[k - 1]);
      }));
      const VarId embedded =
          target_network ? represent(*target_network, future, tape, nullptr)
                         : tape.stop_gradient(represent(params, future, tape, grads));
      const Vector w = masked_weights(k);
      reg_terms.push_back(config.discrepancy == Discrepancy::mse
                              ? tape.squared_error(uv.latents[k], embedded, w)
                              : tape.cosine_distance(uv.latents[k], embedded, w));
    }
  } else if (config.mode == RegularizerMode::decoder) {
    for (std::size_t k = 0; k <= K; ++k) {
      const VarId truth = tape.constant(stack(batch, dims.obs_dim, [k](const TrainTarget& t) {
        return std::span<const double>(k == 0 ? t.observation : t.future_observations[k - 1]);
      }));
      const Vector w = masked_weights(k);
      reg_terms.push_back(config.discrepancy == Discrepancy::mse
                              ? tape.squared_error(uv.decoded[k], truth, w)
                              : tape.cosine_distance(uv.decoded[k], truth, w));
    }
  }

  const VarId reward = accumulate(tape, reward_terms);
  const VarId value = accumulate(tape, value_terms);
  const VarId policy = accumulate(tape, policy_terms);
  VarId objective = tape.add(tape.add(reward, value), policy);
  VarId reg{};
  if (config.mode != RegularizerMode::none) {
    reg = accumulate(tape, reg_terms);
    objective = tape.add(objective, tape.scale(reg, config.omega));
  }

  LossBreakdown out;
  out.reward_loss = tape.scalar(reward);
  out.value_loss = tape.scalar(value);
  out.policy_loss = tape.scalar(policy);
  if (config.mode == RegularizerMode::contrastive) out.contrastive_loss = tape.scalar(reg);
  if (config.mode == RegularizerMode::decoder) out.decoder_loss = tape.scalar(reg);
  out.objective = tape.scalar(objective);
  out.l2_term = config.l2 * squared_norm(params);
  out.total = out.objective + out.l2_term;
  if (grads) tape.backward(objective);
  return out;
}

LossBreakdown alphazero_loss(const MuZeroParams& params, std::span<const TrainTarget> batch,
                             const LossConfig& config, GradTape& tape, MuZeroParams* grads) {
  if (batch.empty()) throw std::invalid_argument("alphazero_loss: empty batch");
  const ModelDims& dims = params.dims;
  const std::size_t B = batch.size();
  const Vector w(B, 1.0 / static_cast<double>(B));
  const VarId obs = tape.constant(stack(batch, dims.obs_dim, [](const TrainTarget& t) {
    return std::span<const double>(t.observation);
  }));
  const PredictionVars pv = alphazero_predict(params, obs, tape, grads);
  const VarId value = tape.softmax_cross_entropy(
      pv.value_logits,
      support_rows(batch, dims.value_anchors, [](const TrainTarget& t) { return t.values[0]; }), w);
  const VarId policy = tape.softmax_cross_entropy(
      pv.policy_logits, stack(batch, dims.action_count, [](const TrainTarget& t) {
        return std::span<const double>(t.policies[0]);
      }),
      w);
  const VarId objective = tape.add(value, policy);
  LossBreakdown out;
  out.value_loss = tape.scalar(value);
  out.policy_loss = tape.scalar(policy);
  out.objective = tape.scalar(objective);
  out.l2_term = config.l2 * squared_norm(params);
  out.total = out.objective + out.l2_term;
  if (grads) tape.backward(objective);
  return out;
}

LossBreakdown compute_loss(const MuZeroParams& params, std::span<const TrainTarget> batch,
                           const LossConfig& config, MuZeroParams* grads,
                           const MuZeroParams* target_network) {
  GradTape tape;
  if (params.dims.alphazero) return alphazero_loss(params, batch, config, tape, grads);
  return muzero_loss(params, batch, config, tape, grads, target_network);
}

LossBreakdown apply_gradient_step(MuZeroParams& params, AdamState& adam,
                                  std::span<const TrainTarget> batch, const LossConfig& loss,
                                  const AdamConfig& optimizer) {
  MuZeroParams grads = zeros_like(params);
  const LossBreakdown out = compute_loss(params, batch, loss, &grads);
  Vector flat = flatten(params);
  const Vector flat_grads = flatten(grads);
  adam_step(flat, flat_grads, adam, optimizer);
  unflatten(flat, params);
  return out;
}

LossBreakdown train_step(MuZeroParams& params, AdamState& adam, const ReplayBuffer& buffer,
                         const ExperimentConfig& config, Rng& rng) {
  const std::size_t unroll = params.dims.alphazero ? 0 : config.unroll_steps;
  const auto batch = sample_batch(buffer, config.batch_size, unroll, config.td_steps,
                                  config.discount, params.dims.action_count, rng);
  AdamConfig opt;
  opt.learning_rate = config.learning_rate;
  opt.l2 = config.l2;
  return apply_gradient_step(params, adam, batch, loss_config(config), opt);
}

// ---------------------------------------------------------------------------

ModelDims model_dims(const ExperimentConfig& config) {
  ModelDims d = default_dims(config.env, config.latent_size, config.support_size);
  d.hidden_size = config.hidden_size;
  d.with_decoder = config.algorithm == Algorithm::muzero_decoder;
  d.alphazero = config.algorithm == Algorithm::alphazero;
  return d;
}

TrainingState init_training(const ExperimentConfig& config) {
  validate(config);
  Rng rng = derive_rng({config.seed, static_cast<std::uint64_t>(Stream::init)});
  TrainingState s{config, init_muzero(rng, model_dims(config)), {}, ReplayBuffer(config.window), 0};
  s.adam = make_adam_state(parameter_count(s.params));
  return s;
}

std::vector<TrajectoryRecord> generate_episodes(const TrainingState& state) {
  const ExperimentConfig& cfg = state.config;
  const std::size_t iteration = state.iteration + 1;
  const SearchConfig search = search_config(cfg);
  std::vector<TrajectoryRecord> out(cfg.episodes);
  auto work = [&](std::size_t e) {
    Rng rng = derive_rng({cfg.seed, static_cast<std::uint64_t>(Stream::self_play), iteration, e});
    out[e] = self_play_episode(cfg, state.params, search, rng);
    out[e].self_play_iteration = iteration;
  };
  const std::size_t workers = std::min(cfg.threads, cfg.episodes);
  if (workers <= 1) {
    for (std::size_t e = 0; e < cfg.episodes; ++e) work(e);
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t e = w; e < cfg.episodes; e += workers) work(e);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

IterationMetrics run_iteration(TrainingState& state) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig& cfg = state.config;
  const std::size_t iteration = state.iteration + 1;

  std::vector<TrajectoryRecord> episodes = generate_episodes(state);
  IterationMetrics m;
  m.iteration = iteration;
  for (const auto& e : episodes) {
    m.mean_return += e.total_reward();
    m.mean_episode_length += static_cast<double>(e.length());
  }
  m.mean_return /= static_cast<double>(episodes.size());
  m.mean_episode_length /= static_cast<double>(episodes.size());
  state.buffer.add_iteration(iteration, std::move(episodes));

  Rng rng = derive_rng({cfg.seed, static_cast<std::uint64_t>(Stream::train), iteration});
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const LossBreakdown l = train_step(state.params, state.adam, state.buffer, cfg, rng);
    m.loss.reward_loss += l.reward_loss;
    m.loss.value_loss += l.value_loss;
    m.loss.policy_loss += l.policy_loss;
    m.loss.contrastive_loss += l.contrastive_loss;
    m.loss.decoder_loss += l.decoder_loss;
    m.loss.l2_term += l.l2_term;
    m.loss.objective += l.objective;
    m.loss.total += l.total;
  }
  const double n = static_cast<double>(cfg.epochs);
  for (double* x : {&m.loss.reward_loss, &m.loss.value_loss, &m.loss.policy_loss,
                    &m.loss.contrastive_loss, &m.loss.decoder_loss, &m.loss.l2_term,
                    &m.loss.objective, &m.loss.total}) {
    *x /= n;
  }
  state.iteration = iteration;
  if (cfg.log_wall_time) {
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return m;
}

std::string format_metrics_row(const IterationMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.3f",
                m.iteration, m.mean_return, m.mean_episode_length, m.loss.reward_loss,
                m.loss.value_loss, m.loss.policy_loss, m.loss.contrastive_loss,
                m.loss.decoder_loss, m.loss.total, m.wall_seconds);
  return buf;
}

void run_training(TrainingState& state, const RunOptions& options) {
  namespace fs = std::filesystem;
  const ExperimentConfig& cfg = state.config;
  const fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  const fs::path metrics_path = out_dir / "metrics.csv";
  // On resume, rows logged after the checkpoint was taken are dropped so the
  // file matches an uninterrupted run.
  std::vector<std::string> kept;
  if (state.iteration > 0 && fs::exists(metrics_path)) {
    std::ifstream in(metrics_path);
    std::string line;
    while (kept.size() < state.iteration + 1 && std::getline(in, line)) kept.push_back(line);
    if (kept.empty() || kept.front() != kMetricsHeader) kept.clear();
  }
  std::ofstream metrics(metrics_path, std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot open metrics file '" + metrics_path.string() + "'");
  if (kept.empty()) kept.push_back(kMetricsHeader);
  for (const auto& line : kept) metrics << line << '\n';

  const std::size_t stop = options.stop_after ? options.stop_after : cfg.self_play_iterations;
  while (state.iteration < stop) {
    const IterationMetrics m = run_iteration(state);
    metrics << format_metrics_row(m) << '\n';
    metrics.flush();
    if (!metrics) throw std::runtime_error("failed writing '" + metrics_path.string() + "'");
    if (options.on_iteration) options.on_iteration(m);
    if (state.iteration % cfg.checkpoint_every == 0) {
      save_checkpoint(out_dir / "checkpoint_latest.bin", state);
    }
  }
  save_checkpoint(out_dir / "checkpoint_latest.bin", state);
  if (state.iteration >= cfg.self_play_iterations) {
    save_checkpoint(out_dir / "checkpoint_final.bin", state);
  }
}

EvaluationReport evaluate(const ExperimentConfig& config, const MuZeroParams& params,
                          std::size_t episodes, std::uint64_t seed) {
  SearchConfig search = search_config(config);
  search.root_noise = false;
  search.temperature = 0.0;
  EvaluationReport report;
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng rng = derive_rng({seed, static_cast<std::uint64_t>(Stream::evaluate), e});
    report.returns.push_back(self_play_episode(config, params, search, rng).total_reward());
  }
  if (!report.returns.empty()) {
    const double n = static_cast<double>(report.returns.size());
    report.mean = std::accumulate(report.returns.begin(), report.returns.end(), 0.0) / n;
    double var = 0.0;
    for (double r : report.returns) var += (r - report.mean) * (r - report.mean);
    report.stddev = std::sqrt(var / n);
  }
  return report;
}

}  // namespace mzlab
