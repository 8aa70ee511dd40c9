#pragma once
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "bnq/dag.hpp"
#include "bnq/dataset.hpp"
#include "bnq/prior.hpp"

namespace bnq {

// Local scores s_i(J) = -ln p(D | i's parent set is J), in natural-log
// units; lower is better. Parent sets are bitmasks over the node indices.
// The table is complete: every J subset of V\{i} with |J| <= m_max has an
// entry.
struct LocalScoreTable {
  int n = 0;
  int m_max = 0;
  std::vector<std::string> names;
  std::vector<std::map<uint32_t, double>> entries;  // per node: mask -> score

  double at(int node, uint32_t mask) const;
};

// Mobius (inclusion-exclusion) weights: s_i(J) = sum over J' subset of J of
// w_i(J'), the monomial coefficients of the score Hamiltonian.
struct WeightTable {
  int n = 0;
  int m_max = 0;
  std::vector<std::map<uint32_t, double>> w;
};

double local_score(const CountTable& counts, const PriorScheme& prior);

LocalScoreTable score_table(const Dataset& ds, int m_max,
                            const PriorScheme& prior, int threads = 1);

double network_score(const LocalScoreTable& table, const Dag& dag);

std::map<uint32_t, double> mobius_weights(const LocalScoreTable& table,
                                          int node);
WeightTable mobius_weights(const LocalScoreTable& table);

// TSV, one line per entry: node name, comma-joined parent names (ascending
// variable index, empty for the empty set), score at 12 significant digits.
// Round-trips exactly.
void save_score_table(std::ostream& out, const LocalScoreTable& table);
LocalScoreTable load_score_table(std::istream& in);

// Canonical enumeration of parent-set masks for one node: size ascending,
// then mask ascending. Used for file layout and completeness checks.
std::vector<uint32_t> parent_set_masks(int n, int node, int m_max);

}  // namespace bnq
