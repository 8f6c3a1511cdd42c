#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mzlab/mcts.hpp"

using namespace mzlab;

namespace {

SearchNode node_with(double prior, int visits = 0, double value_sum = 0.0, double reward = 0.0) {
  SearchNode n;
  n.prior = prior;
  n.visit_count = visits;
  n.value_sum = value_sum;
  n.reward = reward;
  return n;
}

SearchNode root_with_visits(std::vector<int> visits) {
  SearchNode root;
  root.expanded = true;
  for (int v : visits) root.children.push_back(node_with(1.0 / visits.size(), v));
  root.visit_count = std::accumulate(visits.begin(), visits.end(), 0);
  return root;
}

MuZeroParams cartpole_model(std::uint64_t seed) {
  Rng rng(seed);
  return init_muzero(rng, default_dims(EnvKind::cartpole, 8, 15));
}

}  // namespace

TEST_CASE("ucb score examples") {
  const MinMaxStats empty;
  const SearchNode parent = node_with(1.0, 1);
  const SearchNode child = node_with(1.0, 0);
  const double expected = 1.25 + std::log(19654.0 / 19652.0);
  CHECK(std::abs(ucb_score(parent, child, empty, 1.25, 19652.0, 0.997) - expected) < 1e-9);
  CHECK(std::abs(expected - 1.25010) < 1e-5);

  CHECK(ucb_score(parent, node_with(0.0, 0), empty, 1.25, 19652.0, 0.997) == 0.0);

  const SearchNode parent9 = node_with(1.0, 9);
  for (double prior : {0.01, 0.3, 1.0}) {
    const SearchNode c = node_with(prior, 0);
    CHECK(ucb_score(parent9, c, empty, 2.5, 19652.0, 0.997) >
          ucb_score(parent9, c, empty, 1.25, 19652.0, 0.997));
  }
}

TEST_CASE("ucb ranking is invariant to a constant shift of all q-values") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const double shift = uniform(rng, -50.0, 50.0);
    SearchNode parent = node_with(1.0, 20);
    SearchNode shifted = parent;
    MinMaxStats stats, shifted_stats;
    for (int a = 0; a < 4; ++a) {
      const int visits = static_cast<int>(rng() % 5);
      const double value = uniform(rng, -3.0, 3.0);
      const double reward = uniform(rng, -1.0, 1.0);
      const double prior = uniform(rng, 0.0, 1.0);
      parent.children.push_back(node_with(prior, visits, value * visits, reward));
      shifted.children.push_back(node_with(prior, visits, value * visits, reward + shift));
      if (visits > 0) {
        stats.update(reward + 0.997 * value);
        shifted_stats.update(reward + shift + 0.997 * value);
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const double da = ucb_score(parent, parent.children[a], stats, 1.25, 19652, 0.997) -
                          ucb_score(parent, parent.children[b], stats, 1.25, 19652, 0.997);
        const double db =
            ucb_score(shifted, shifted.children[a], shifted_stats, 1.25, 19652, 0.997) -
            ucb_score(shifted, shifted.children[b], shifted_stats, 1.25, 19652, 0.997);
        CHECK(std::abs(da - db) < 1e-9);
      }
    }
  }
}

TEST_CASE("minmax stats") {
  MinMaxStats s;
  CHECK(s.normalize(4.0) == 0.0);
  s.update(2.0);
  CHECK(s.normalize(2.0) == 0.0);
  s.update(6.0);
  CHECK(s.min_q <= s.max_q);
  CHECK(s.normalize(4.0) == 0.5);
  CHECK(s.normalize(6.0) == 1.0);
}

TEST_CASE("backup examples") {
  SUBCASE("discounted two-edge path") {
    SearchNode root, a, b;
    a.reward = 1.0;
    b.reward = 1.0;
    std::vector<SearchNode*> path{&root, &a, &b};
    MinMaxStats stats;
    backup(path, 10.0, 0.997, stats);
    const double oracle = 1.0 + 0.997 * (1.0 + 0.997 * 10.0);
    CHECK(std::abs(root.value_sum - oracle) < 1e-12);
    CHECK(std::abs(root.value_sum - 11.93709) < 1e-5);
    CHECK(b.value_sum == 10.0);
    CHECK(std::abs(a.value_sum - (1.0 + 0.997 * 10.0)) < 1e-12);
    for (SearchNode* n : path) CHECK(n->visit_count == 1);
    CHECK(stats.min_q <= stats.max_q);
  }
  SUBCASE("gamma zero cuts propagation") {
    SearchNode root, a;
    std::vector<SearchNode*> path{&root, &a};
    MinMaxStats stats;
    backup(path, 5.0, 0.0, stats);
    CHECK(a.value_sum == 5.0);
    CHECK(root.value_sum == 0.0);
  }
  SUBCASE("gamma one without rewards") {
    SearchNode root, a, b, c;
    std::vector<SearchNode*> path{&root, &a, &b, &c};
    MinMaxStats stats;
    backup(path, 3.5, 1.0, stats);
    for (SearchNode* n : path) CHECK(n->value_sum == 3.5);
  }
}

TEST_CASE("node values stay inside the range of backed-up returns") {
  Rng rng(12);
  SearchNode root;
  root.children.assign(2, SearchNode{});
  for (auto& c : root.children) {
    c.reward = uniform(rng, -1.0, 1.0);
    c.children.assign(2, SearchNode{});
    for (auto& gc : c.children) gc.reward = uniform(rng, -1.0, 1.0);
  }
  MinMaxStats stats;
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < 100; ++i) {
    SearchNode& c = root.children[rng() % 2];
    SearchNode& gc = c.children[rng() % 2];
    std::vector<SearchNode*> path{&root, &c, &gc};
    const double leaf = uniform(rng, -10.0, 10.0);
    backup(path, leaf, 0.9, stats);
    const double g = c.reward + 0.9 * (gc.reward + 0.9 * leaf);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
    CHECK(root.value() >= lo - 1e-12);
    CHECK(root.value() <= hi + 1e-12);
  }
  CHECK(root.visit_count == 100);
}

TEST_CASE("root noise") {
  Rng rng(1);
  const Vector priors{0.7, 0.2, 0.1};
  CHECK(add_root_noise(priors, 0.25, 0.0, rng) == priors);
  Vector mean(3, 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Vector p(3);
    for (double& x : p) x = uniform(rng, 0.01, 1.0);
    const double z = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= z;
    const Vector out = add_root_noise(p, 0.25, 0.25, rng);
    CHECK(std::abs(std::accumulate(out.begin(), out.end(), 0.0) - 1.0) < 1e-12);
    for (double x : out) CHECK(x >= 0.0);
    const Vector u = add_root_noise({1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.25, 0.25, rng);
    for (int a = 0; a < 3; ++a) mean[a] += u[a] / n;
  }
  // Dirichlet(0.25, 0.25, 0.25) has mean 1/3 and variance (1/3)(2/3)/1.75 per entry;
  // the noise enters with weight 0.25.
  const double sigma = 0.25 * std::sqrt((1.0 / 3) * (2.0 / 3) / 1.75 / n);
  for (double m : mean) CHECK(std::abs(m - 1.0 / 3) < 4.0 * sigma);
}

TEST_CASE("visit policy") {
  const Vector p = visit_policy(root_with_visits({8, 3}), 1.0);
  CHECK(p[0] == doctest::Approx(8.0 / 11).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(3.0 / 11).epsilon(1e-15));
  CHECK(visit_policy(root_with_visits({0, 11, 0}), 1.0) == Vector{0.0, 1.0, 0.0});
  CHECK(visit_policy(root_with_visits({3, 5, 5}), 0.0) == Vector{0.0, 1.0, 0.0});
  CHECK(visit_policy(root_with_visits({4, 4}), 0.0) == Vector{1.0, 0.0});
  const Vector half = visit_policy(root_with_visits({1, 2}), 0.5);
  CHECK(half[0] == doctest::Approx(0.2));
  CHECK_THROWS(visit_policy(root_with_visits({0, 0}), 1.0));
}

TEST_CASE("sample_action") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) CHECK(sample_action(Vector{0.0, 0.0, 1.0}, rng) == 2);
  Rng a(44), b(44);
  const Vector policy{0.5, 0.3, 0.2};
  for (int i = 0; i < 100; ++i) CHECK(sample_action(policy, a) == sample_action(policy, b));

  const int n = 100000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) ++counts[sample_action(policy, rng)];
  for (int k = 0; k < 3; ++k) {
    const double sigma = std::sqrt(n * policy[k] * (1.0 - policy[k]));
    CHECK(std::abs(counts[k] - n * policy[k]) < 3.0 * sigma);
  }
  CHECK_THROWS_AS(sample_action(Vector{0.5, 0.6}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_action(Vector{1.5, -0.5}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_action(Vector{}, rng), std::invalid_argument);
}

TEST_CASE("muzero search") {
  const MuZeroParams p = cartpole_model(9);
  const Observation o{0.01, 0.02, -0.03, 0.04};
  SearchConfig cfg;
  Rng rng(0);
  for (int trial = 0; trial < 30; ++trial) {
    const SearchResult r = run_search(p, o, cfg, rng);
    CHECK(std::accumulate(r.visit_counts.begin(), r.visit_counts.end(), 0) == 11);
    CHECK(std::abs(std::accumulate(r.visit_policy.begin(), r.visit_policy.end(), 0.0) - 1.0) < 1e-9);
    CHECK(r.chosen_action < 2);
  }
  cfg.simulations = 50;
  Rng a(77), b(77);
  const SearchResult ra = run_search(p, o, cfg, a);
  const SearchResult rb = run_search(p, o, cfg, b);
  CHECK(ra.visit_counts == rb.visit_counts);
  CHECK(ra.visit_policy == rb.visit_policy);
  CHECK(ra.root_value == rb.root_value);
  CHECK(ra.chosen_action == rb.chosen_action);
  CHECK(std::accumulate(ra.visit_counts.begin(), ra.visit_counts.end(), 0) == 50);
}

TEST_CASE("single-action model") {
  ModelDims dims = default_dims(EnvKind::cartpole, 4, 15);
  dims.action_count = 1;
  Rng init(3);
  const MuZeroParams p = init_muzero(init, dims);
  Rng rng(1);
  const SearchResult r = run_search(p, {0.0, 0.0, 0.0, 0.0}, SearchConfig{}, rng);
  CHECK(r.visit_policy == Vector{1.0});
  CHECK(r.visit_counts == std::vector<int>{11});
  CHECK(r.chosen_action == 0);
}

TEST_CASE("alphazero search") {
  ModelDims dims = default_dims(EnvKind::cartpole, 8, 15);
  dims.alphazero = true;
  Rng init(6);
  const MuZeroParams p = init_muzero(init, dims);
  SearchConfig cfg;
  Rng rng(2);
  const SearchResult r = run_search_alphazero(p, EnvKind::cartpole, {0.0, 0.1, 0.0, -0.1}, cfg, rng);
  CHECK(std::accumulate(r.visit_counts.begin(), r.visit_counts.end(), 0) == 11);
  // Near the angle limit every line of play ends quickly; search must still finish.
  const SearchResult edge =
      run_search_alphazero(p, EnvKind::cartpole, {0.0, 0.0, 0.2, 2.0}, cfg, rng);
  CHECK(std::accumulate(edge.visit_counts.begin(), edge.visit_counts.end(), 0) == 11);
  Rng a(8), b(8);
  CHECK(run_search_alphazero(p, EnvKind::cartpole, {0.0, 0.1, 0.0, -0.1}, cfg, a).visit_counts ==
        run_search_alphazero(p, EnvKind::cartpole, {0.0, 0.1, 0.0, -0.1}, cfg, b).visit_counts);
}
