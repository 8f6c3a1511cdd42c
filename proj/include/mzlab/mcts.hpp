#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mzlab/envs.hpp"
#include "mzlab/model.hpp"
#include "mzlab/rng.hpp"

namespace mzlab {

struct SearchConfig {
  std::size_t simulations = 11;
  double c1 = 1.25;
  double c2 = 19652.0;
  double discount = 0.997;
  double dirichlet_alpha = 0.25;
  double exploration_fraction = 0.25;
  // 0 selects the most-visited action (lowest index on ties).
  double temperature = 1.0;
  bool root_noise = true;
};

struct MinMaxStats {
  double min_q = std::numeric_limits<double>::infinity();
  double max_q = -std::numeric_limits<double>::infinity();

  void update(double q);
  // Maps q into [0, 1] over the observed range; 0 until two distinct values were seen.
  double normalize(double q) const;
};

struct SearchNode {
  double prior = 0.0;
  int visit_count = 0;
  double value_sum = 0.0;
  double reward = 0.0;
  LatentState latent;     // MuZero mode
  Observation env_state;  // AlphaZero mode
  bool terminal = false;  // AlphaZero mode only
  bool expanded = false;
  std::vector<SearchNode> children;  // indexed by action once expanded

  double value() const { return visit_count == 0 ? 0.0 : value_sum / visit_count; }
};

struct SearchResult {
  Vector visit_policy;
  std::vector<int> visit_counts;
  double root_value = 0.0;
  std::size_t chosen_action = 0;
};

double ucb_score(const SearchNode& parent, const SearchNode& child, const MinMaxStats& stats,
                 double c1, double c2, double discount);

// (1 - fraction) * priors + fraction * Dirichlet(alpha).
Vector add_root_noise(const Vector& priors, double alpha, double fraction, Rng& rng);

// Walks leaf -> root: value_sum += G, visit_count += 1, then G = reward + discount * G.
void backup(std::span<SearchNode* const> path, double leaf_value, double discount,
            MinMaxStats& stats);

Vector visit_policy(const SearchNode& root, double temperature);

std::size_t sample_action(std::span<const double> policy, Rng& rng);

// Search over the learned latent MDP from a single real observation.
SearchResult run_search(const MuZeroParams& params, const Observation& root_observation,
                        const SearchConfig& config, Rng& rng);

// Search with f as predictor and the true simulator as transition model.
// Terminal states are leaves with value 0.
SearchResult run_search_alphazero(const MuZeroParams& params, EnvKind env,
                                  const Observation& root_state, const SearchConfig& config,
                                  Rng& rng);

}  // namespace mzlab
