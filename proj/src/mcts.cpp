#include "mzlab/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mzlab {

void MinMaxStats::update(double q) {
  min_q = std::min(min_q, q);
  max_q = std::max(max_q, q);
}

double MinMaxStats::normalize(double q) const {
  if (max_q > min_q) return (q - min_q) / (max_q - min_q);
  return 0.0;
}

double ucb_score(const SearchNode& parent, const SearchNode& child, const MinMaxStats& stats,
                 double c1, double c2, double discount) {
  const double parent_visits = parent.visit_count;
  double pb_c = std::log((parent_visits + c2 + 1.0) / c2) + c1;
  pb_c *= std::sqrt(parent_visits) / (child.visit_count + 1.0);
  const double prior_score = pb_c * child.prior;
  const double value_score =
      child.visit_count > 0 ? stats.normalize(child.reward + discount * child.value()) : 0.0;
  return prior_score + value_score;
}

Vector add_root_noise(const Vector& priors, double alpha, double fraction, Rng& rng) {
  Vector noise(priors.size());
  std::gamma_distribution<double> gamma(alpha, 1.0);
  double total = 0.0;
  for (double& n : noise) {
    n = gamma(rng);
    total += n;
  }
  Vector out(priors.size());
  for (std::size_t i = 0; i < priors.size(); ++i) {
    // All-zero gamma draws are possible for tiny alpha; fall back to uniform noise.
    const double eta = total > 0.0 ? noise[i] / total : 1.0 / static_cast<double>(priors.size());
    out[i] = (1.0 - fraction) * priors[i] + fraction * eta;
  }
  return out;
}

void backup(std::span<SearchNode* const> path, double leaf_value, double discount,
            MinMaxStats& stats) {
  double g = leaf_value;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    SearchNode& node = **it;
    node.value_sum += g;
    node.visit_count += 1;
    stats.update(node.reward + discount * node.value());
    g = node.reward + discount * g;
  }
}

Vector visit_policy(const SearchNode& root, double temperature) {
  const std::size_t n = root.children.size();
  if (n == 0) throw std::logic_error("visit_policy: root has no children");
  Vector p(n, 0.0);
  int total = 0;
  for (const auto& c : root.children) total += c.visit_count;
  if (total <= 0) throw std::logic_error("visit_policy: no child visits");
  if (temperature <= 0.0) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < n; ++a) {
      if (root.children[a].visit_count > root.children[best].visit_count) best = a;
    }
    p[best] = 1.0;
    return p;
  }
  const int max_visits = std::max_element(root.children.begin(), root.children.end(),
                                          [](const auto& x, const auto& y) {
                                            return x.visit_count < y.visit_count;
                                          })->visit_count;
  double z = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const double c = root.children[a].visit_count;
    p[a] = temperature == 1.0 ? c : std::pow(c / max_visits, 1.0 / temperature);
    z += p[a];
  }
  for (double& x : p) x /= z;
  return p;
}

std::size_t sample_action(std::span<const double> policy, Rng& rng) {
  if (policy.empty()) throw std::invalid_argument("sample_action: empty policy");
  double total = 0.0;
  for (double p : policy) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("sample_action: invalid probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument("sample_action: policy does not sum to 1");
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < policy.size(); ++a) {
    if (policy[a] <= 0.0) continue;
    last_positive = a;
    acc += policy[a];
    if (u < acc) return a;
  }
  return last_positive;
}

namespace {

void expand(SearchNode& node, const Vector& policy_logits) {
  const Vector priors = softmax(policy_logits);
  node.children.assign(priors.size(), SearchNode{});
  for (std::size_t a = 0; a < priors.size(); ++a) node.children[a].prior = priors[a];
  node.expanded = true;
}

std::size_t select_child(const SearchNode& node, const MinMaxStats& stats, const SearchConfig& cfg) {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < node.children.size(); ++a) {
    const double s = ucb_score(node, node.children[a], stats, cfg.c1, cfg.c2, cfg.discount);
    if (s > best_score) {
      best_score = s;
      best = a;
    }
  }
  return best;
}

// Shared simulation loop. `evaluate(parent, action, leaf)` fills the leaf and
// returns its bootstrap value.
template <typename Evaluate>
SearchResult search_loop(SearchNode& root, const SearchConfig& config, Rng& rng, Evaluate&& evaluate) {
  if (config.root_noise && config.exploration_fraction > 0.0) {
    Vector priors(root.children.size());
    for (std::size_t a = 0; a < priors.size(); ++a) priors[a] = root.children[a].prior;
    priors = add_root_noise(priors, config.dirichlet_alpha, config.exploration_fraction, rng);
    for (std::size_t a = 0; a < priors.size(); ++a) root.children[a].prior = priors[a];
  }

  MinMaxStats stats;
  std::vector<SearchNode*> path;
  for (std::size_t sim = 0; sim < config.simulations; ++sim) {
    path.clear();
    SearchNode* node = &root;
    path.push_back(node);
    std::size_t action = 0;
    while (node->expanded) {
      action = select_child(*node, stats, config);
      node = &node->children[action];
      path.push_back(node);
    }
    const double value = evaluate(*path[path.size() - 2], action, *node);
    backup(path, value, config.discount, stats);
  }

  SearchResult result;
  for (const auto& c : root.children) result.visit_counts.push_back(c.visit_count);
  result.visit_policy = visit_policy(root, config.temperature);
  result.root_value = root.value();
  result.chosen_action = sample_action(result.visit_policy, rng);
  return result;
}

}  // namespace

SearchResult run_search(const MuZeroParams& params, const Observation& root_observation,
                        const SearchConfig& config, Rng& rng) {
  SearchNode root;
  const Inference init = initial_inference(params, root_observation);
  root.latent = init.latent;
  expand(root, init.policy_logits);
  return search_loop(root, config, rng, [&](SearchNode& parent, std::size_t action, SearchNode& leaf) {
    const Inference inf = recurrent_inference(params, parent.latent, action);
    leaf.reward = inf.reward;
    leaf.latent = inf.latent;
    expand(leaf, inf.policy_logits);
    return inf.value;
  });
}

SearchResult run_search_alphazero(const MuZeroParams& params, EnvKind env,
                                  const Observation& root_state, const SearchConfig& config,
                                  Rng& rng) {
  SearchNode root;
  root.env_state = root_state;
  expand(root, alphazero_inference(params, root_state).policy_logits);
  return search_loop(root, config, rng, [&](SearchNode& parent, std::size_t action, SearchNode& leaf) {
    if (leaf.terminal) return 0.0;
    const StepResult step = transition(env, parent.env_state, static_cast<int>(action));
    leaf.reward = step.reward;
    leaf.env_state = step.observation;
    if (step.terminal) {
      leaf.terminal = true;
      return 0.0;
    }
    const Inference inf = alphazero_inference(params, leaf.env_state);
    expand(leaf, inf.policy_logits);
    return inf.value;
  });
}

}  // namespace mzlab
