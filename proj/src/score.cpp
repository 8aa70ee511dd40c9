#include "bnq/score.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bnq/textfmt.hpp"

namespace bnq {

double LocalScoreTable::at(int node, uint32_t mask) const {
  const auto& m = entries.at(node);
  auto it = m.find(mask);
  if (it == m.end())
    throw std::out_of_range("score table has no entry for node " +
                            std::to_string(node) + ", mask " +
                            std::to_string(mask));
  return it->second;
}

std::vector<uint32_t> parent_set_masks(int n, int node, int m_max) {
  std::vector<uint32_t> masks;
  for (uint32_t m = 0; m < (1u << n); ++m) {
    if (m & (1u << node)) continue;
    if (std::popcount(m) > m_max) continue;
    masks.push_back(m);
  }
  std::stable_sort(masks.begin(), masks.end(), [](uint32_t a, uint32_t b) {
    int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  return masks;
}

double local_score(const CountTable& counts, const PriorScheme& prior) {
  if (counts.q < 1 || counts.r < 1)
    throw std::invalid_argument("local_score: malformed count table");
  double a_ij = prior.alpha_ij(counts.q, counts.r);
  double a_ijk = prior.alpha_ijk(counts.q, counts.r);
  if (a_ij <= 0.0 || a_ijk <= 0.0)
    throw std::invalid_argument("local_score: prior must be positive");

  double s = 0.0;
  for (int j = 0; j < counts.q; ++j) {
    s += std::lgamma(counts.n_ij[j] + a_ij) - std::lgamma(a_ij);
    for (int k = 0; k < counts.r; ++k)
      s -= std::lgamma(counts.n_ijk[j][k] + a_ijk) - std::lgamma(a_ijk);
  }
  return s;
}

LocalScoreTable score_table(const Dataset& ds, int m_max,
                            const PriorScheme& prior, int threads) {
  int n = ds.n();
  if (m_max < 1) throw std::invalid_argument("score_table: m_max must be >= 1");
  if (m_max >= n)
    throw std::invalid_argument("score_table: m_max must be < node count");
  if (n < 2) throw std::invalid_argument("score_table: need at least 2 variables");
  if (n > 25) throw std::invalid_argument("score_table: dense table capped at 25 variables");

  LocalScoreTable table;
  table.n = n;
  table.m_max = m_max;
  table.names = ds.names();
  table.entries.resize(n);

  auto score_node = [&](int i) {
    std::map<uint32_t, double> e;
    for (uint32_t mask : parent_set_masks(n, i, m_max)) {
      std::vector<int> parents;
      for (int p = 0; p < n; ++p)
        if (mask & (1u << p)) parents.push_back(p);
      e[mask] = local_score(tabulate_counts(ds, i, parents), prior);
    }
    table.entries[i] = std::move(e);
  };

  if (threads <= 1) {
    for (int i = 0; i < n; ++i) score_node(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
          score_node(i);
      });
    for (auto& th : pool) th.join();
  }
  return table;
}

double network_score(const LocalScoreTable& table, const Dag& dag) {
  if (dag.n != table.n)
    throw std::invalid_argument("network_score: node count mismatch");
  double s = 0.0;
  for (int i = 0; i < dag.n; ++i) {
    uint32_t mask = 0;
    int sz = 0;
    for (int p : dag.parents_of(i)) {
      mask |= 1u << p;
      ++sz;
    }
    if (sz > table.m_max)
      throw std::invalid_argument("network_score: node " + std::to_string(i) +
                                  " has more than m_max parents");
    s += table.at(i, mask);
  }
  return s;
}

std::map<uint32_t, double> mobius_weights(const LocalScoreTable& table,
                                          int node) {
  const auto& e = table.entries.at(node);
  size_t expected = parent_set_masks(table.n, node, table.m_max).size();
  if (e.size() != expected)
    throw std::invalid_argument("mobius_weights: incomplete table for node " +
                                std::to_string(node));
  std::map<uint32_t, double> w;
  for (const auto& [mask, unused] : e) {
    (void)unused;
    int bits = std::popcount(mask);
    double acc = 0.0;
    // alternating subset sum, fixed descending order for reproducibility
    for (uint32_t sub = mask;; sub = (sub - 1) & mask) {
      double sign = ((bits - std::popcount(sub)) & 1) ? -1.0 : 1.0;
      acc += sign * e.at(sub);
      if (sub == 0) break;
    }
    w[mask] = acc;
  }
  return w;
}

WeightTable mobius_weights(const LocalScoreTable& table) {
  WeightTable wt;
  wt.n = table.n;
  wt.m_max = table.m_max;
  wt.w.reserve(table.n);
  for (int i = 0; i < table.n; ++i) wt.w.push_back(mobius_weights(table, i));
  return wt;
}

void save_score_table(std::ostream& out, const LocalScoreTable& table) {
  for (int i = 0; i < table.n; ++i) {
    for (uint32_t mask : parent_set_masks(table.n, i, table.m_max)) {
      std::string parents;
      bool first = true;
      for (int p = 0; p < table.n; ++p) {
        if (!(mask & (1u << p))) continue;
        if (!first) parents += ",";
        parents += table.names[p];
        first = false;
      }
      out << table.names[i] << "\t" << parents << "\t"
          << fmt_sig(table.at(i, mask), 12) << "\n";
    }
  }
}

LocalScoreTable load_score_table(std::istream& in) {
  struct Entry {
    std::string node;
    std::vector<std::string> parents;
    double score;
  };
  std::vector<Entry> raw;
  std::vector<std::string> names;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw std::runtime_error("score table line " + std::to_string(lineno) +
                               ": expected 3 tab-separated fields");
    Entry e;
    e.node = trim(fields[0]);
    std::string ps = trim(fields[1]);
    if (!ps.empty())
      for (auto& p : split(ps, ',')) e.parents.push_back(trim(p));
    e.score = std::strtod(fields[2].c_str(), nullptr);
    if (std::find(names.begin(), names.end(), e.node) == names.end())
      names.push_back(e.node);
    raw.push_back(std::move(e));
  }
  if (raw.empty()) throw std::runtime_error("empty score table");

  LocalScoreTable table;
  table.n = static_cast<int>(names.size());
  table.names = names;
  table.entries.resize(table.n);
  auto index_of = [&](const std::string& name) {
    for (int i = 0; i < table.n; ++i)
      if (names[i] == name) return i;
    throw std::runtime_error("score table references unknown variable '" +
                             name + "'");
  };
  int m_max = 0;
  for (const auto& e : raw) {
    int node = index_of(e.node);
    uint32_t mask = 0;
    for (const auto& p : e.parents) {
      int pi = index_of(p);
      if (pi == node)
        throw std::runtime_error("score table: node '" + e.node +
                                 "' listed in its own parent set");
      mask |= 1u << pi;
    }
    m_max = std::max(m_max, std::popcount(mask));
    if (!table.entries[node].emplace(mask, e.score).second)
      throw std::runtime_error("score table: duplicate entry for node '" +
                               e.node + "'");
  }
  table.m_max = m_max;
  for (int i = 0; i < table.n; ++i) {
    size_t expected = parent_set_masks(table.n, i, m_max).size();
    if (table.entries[i].size() != expected)
      throw std::runtime_error("score table incomplete for variable '" +
                               names[i] + "'");
  }
  return table;
}

}  // namespace bnq
