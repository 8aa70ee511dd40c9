#pragma once
#include "bnq/dag.hpp"
#include "bnq/score.hpp"

namespace bnq {

struct LearnResult {
  Dag dag;
  double score = 0.0;           // network_score of dag, recomputed in node order
  long long dags_evaluated = 0; // enumerate_dags only
};

// Per candidate-predecessor subset S (mask without the node's own bit): the
// best parent set J subset of S with |J| <= m_max, and its score.
struct BestParentCache {
  std::vector<double> score;        // indexed by S
  std::vector<uint32_t> parent_set;
};

BestParentCache best_parent_cache(const LocalScoreTable& table, int node);

// Exact minimum-score structure by dynamic programming over node subsets
// (best-parent-set cache, then optimal sink ordering). n <= 20. Ties break
// to the lowest sink index and the lexicographically smallest parent set.
LearnResult exact_learn(const LocalScoreTable& table);

// Brute force over every labeled DAG with indegrees <= m; n <= 4. First
// minimum in arc-bitmask order wins.
LearnResult enumerate_dags(int n, int m, const LocalScoreTable& table);

}  // namespace bnq
