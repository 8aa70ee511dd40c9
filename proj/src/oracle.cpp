#include "bnq/oracle.hpp"

#include <bit>
#include <stdexcept>

namespace bnq {

namespace {

// lexicographic order on parent sets viewed as ascending index sequences,
// e.g. {} < {0} < {0,1} < {0,2} < {1}
bool set_lex_less(uint32_t a, uint32_t b) {
  while (a || b) {
    if (a == b) return false;
    if (!a) return true;   // proper prefix
    if (!b) return false;
    int ea = std::countr_zero(a), eb = std::countr_zero(b);
    if (ea != eb) return ea < eb;
    a &= a - 1;
    b &= b - 1;
  }
  return false;
}

}  // namespace

BestParentCache best_parent_cache(const LocalScoreTable& table, int node) {
  int n = table.n;
  int m = table.m_max;
  BestParentCache cache;
  cache.score.assign(size_t{1} << n, 0.0);
  cache.parent_set.assign(size_t{1} << n, 0);
  for (uint32_t s = 0; s < (1u << n); ++s) {
    if (s & (1u << node)) continue;
    double best;
    uint32_t best_set;
    if (std::popcount(s) <= m) {
      best = table.at(node, s);
      best_set = s;
    } else {
      best = 1e300;
      best_set = s;  // placeholder, always beaten below
    }
    for (uint32_t rest = s; rest;) {
      uint32_t bit = rest & (0u - rest);
      rest ^= bit;
      uint32_t sub = s ^ bit;
      double cand = cache.score[sub];
      uint32_t cand_set = cache.parent_set[sub];
      if (cand < best ||
          (cand == best && set_lex_less(cand_set, best_set))) {
        best = cand;
        best_set = cand_set;
      }
    }
    cache.score[s] = best;
    cache.parent_set[s] = best_set;
  }
  return cache;
}

LearnResult exact_learn(const LocalScoreTable& table) {
  int n = table.n;
  if (n > 20)
    throw std::invalid_argument("exact_learn: subset DP capped at 20 nodes");
  if (n < 1) throw std::invalid_argument("exact_learn: empty table");

  std::vector<BestParentCache> cache;
  cache.reserve(n);
  for (int i = 0; i < n; ++i) cache.push_back(best_parent_cache(table, i));

  size_t total = size_t{1} << n;
  std::vector<double> dp(total, 0.0);
  std::vector<int> sink(total, -1);
  for (uint32_t s = 1; s < total; ++s) {
    double best = 1e300;
    int best_sink = -1;
    for (uint32_t rest = s; rest;) {
      uint32_t bit = rest & (0u - rest);
      rest ^= bit;
      int i = std::countr_zero(bit);
      uint32_t pred = s ^ bit;
      double v = dp[pred] + cache[i].score[pred];
      if (v < best) {  // ascending i, so ties keep the lowest sink
        best = v;
        best_sink = i;
      }
    }
    dp[s] = best;
    sink[s] = best_sink;
  }

  LearnResult out;
  out.dag = Dag(n, table.names);
  uint32_t s = static_cast<uint32_t>(total - 1);
  while (s) {
    int i = sink[s];
    uint32_t pred = s ^ (1u << i);
    uint32_t parents = cache[i].parent_set[pred];
    for (uint32_t rest = parents; rest;) {
      uint32_t bit = rest & (0u - rest);
      rest ^= bit;
      out.dag.add_arc(std::countr_zero(bit), i);
    }
    s = pred;
  }
  out.score = network_score(table, out.dag);
  return out;
}

LearnResult enumerate_dags(int n, int m, const LocalScoreTable& table) {
  if (n > 4)
    throw std::invalid_argument("enumerate_dags: brute force capped at 4 nodes");
  if (n != table.n)
    throw std::invalid_argument("enumerate_dags: table node count mismatch");

  int n_arcs = n * (n - 1);
  LearnResult out;
  double best = 1e300;
  for (uint32_t mask = 0; mask < (1u << n_arcs); ++mask) {
    Dag g(n, table.names);
    bool capped = false;
    int bit = 0;
    for (int i = 0; i < n && !capped; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (mask & (1u << bit)) {
          g.add_arc(i, j);
          if (g.indegree(j) > m) {
            capped = true;
            break;
          }
        }
        ++bit;
      }
    if (capped || !is_acyclic(g)) continue;
    ++out.dags_evaluated;
    double s = network_score(table, g);
    if (s < best) {  // ascending mask, first optimum wins
      best = s;
      out.dag = std::move(g);
    }
  }
  out.score = best;
  return out;
}

}  // namespace bnq
