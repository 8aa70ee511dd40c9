#include "bnq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bnq/rng.hpp"
#include "bnq/textfmt.hpp"

namespace bnq {

std::vector<std::string> Dataset::names() const {
  std::vector<std::string> out;
  out.reserve(variables.size());
  for (const auto& v : variables) out.push_back(v.name);
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.variables == b.variables && a.rows == b.rows;
}

RawTable load_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty input");
  RawTable t;
  for (auto& name : split(trim(line), ',')) {
    name = trim(name);
    if (name.empty()) throw std::runtime_error("empty column name in header");
    for (const auto& seen : t.column_names)
      if (seen == name)
        throw std::runtime_error("duplicate column name '" + name + "'");
    t.column_names.push_back(name);
  }
  size_t ncols = t.column_names.size();
  t.columns.assign(ncols, {});

  size_t row = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    ++row;
    auto fields = split(line, ',');
    if (fields.size() != ncols) {
      throw std::runtime_error(
          "row " + std::to_string(row) + ": " + std::to_string(fields.size()) +
          (fields.size() == 1 ? " field" : " fields") + ", expected " +
          std::to_string(ncols));
    }
    for (size_t c = 0; c < ncols; ++c) {
      std::string f = trim(fields[c]);
      char* end = nullptr;
      double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v)) {
        throw std::runtime_error("row " + std::to_string(row) + ": field " +
                                 std::to_string(c + 1) + " ('" + f +
                                 "') is not numeric");
      }
      t.columns[c].push_back(v);
    }
  }
  if (row == 0) throw std::runtime_error("no data rows");
  t.n_rows = row;
  return t;
}

RawTable load_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  try {
    return load_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

namespace {

// min-rank of each value among the column (ties share the rank of their
// first occurrence in sorted order), so binning depends only on the ordering
// of the data.
std::vector<size_t> min_ranks(const std::vector<double>& col) {
  size_t n = col.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return col[a] < col[b]; });
  std::vector<size_t> rank(n);
  size_t r = 0;
  for (size_t k = 0; k < n; ++k) {
    if (k > 0 && col[order[k]] != col[order[k - 1]]) r = k;
    rank[order[k]] = r;
  }
  return rank;
}

// natural-log mutual information of a joint count matrix; zero cells
// contribute 0.
double mi_of_counts(const std::vector<std::vector<long long>>& joint,
                    long long total) {
  size_t ra = joint.size();
  size_t rb = ra ? joint[0].size() : 0;
  std::vector<long long> rs(ra, 0), cs(rb, 0);
  for (size_t a = 0; a < ra; ++a)
    for (size_t b = 0; b < rb; ++b) {
      rs[a] += joint[a][b];
      cs[b] += joint[a][b];
    }
  double nn = static_cast<double>(total);
  double s = 0.0;
  for (size_t a = 0; a < ra; ++a)
    for (size_t b = 0; b < rb; ++b) {
      long long c = joint[a][b];
      if (c == 0) continue;
      double p = c / nn;
      s += p * std::log(c * nn / (static_cast<double>(rs[a]) * cs[b]));
    }
  return s;
}

std::vector<std::vector<long long>> joint_counts(
    const std::vector<uint8_t>& a, int ra, const std::vector<uint8_t>& b,
    int rb) {
  std::vector<std::vector<long long>> j(ra, std::vector<long long>(rb, 0));
  for (size_t t = 0; t < a.size(); ++t) ++j[a[t]][b[t]];
  return j;
}

// collapse rows k and k+1 of a joint count matrix
std::vector<std::vector<long long>> collapse_rows(
    const std::vector<std::vector<long long>>& j, int k) {
  std::vector<std::vector<long long>> out;
  out.reserve(j.size() - 1);
  for (int a = 0; a < static_cast<int>(j.size()); ++a) {
    if (a == k + 1) {
      for (size_t b = 0; b < j[a].size(); ++b) out.back()[b] += j[a][b];
    } else {
      out.push_back(j[a]);
    }
  }
  return out;
}

}  // namespace

Dataset discretize_hartemink(const RawTable& raw, int levels,
                             int initial_bins) {
  if (levels < 2) throw std::invalid_argument("levels must be >= 2");
  if (initial_bins < levels)
    throw std::invalid_argument("initial_bins must be >= levels");
  if (raw.n_rows < static_cast<size_t>(initial_bins))
    throw std::invalid_argument("need at least initial_bins rows");

  int nv = static_cast<int>(raw.columns.size());
  size_t n = raw.n_rows;
  std::vector<std::vector<uint8_t>> disc(nv);
  std::vector<int> card(nv);

  for (int i = 0; i < nv; ++i) {
    const auto& col = raw.columns[i];
    std::vector<double> distinct(col);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (distinct.size() == 1)
      throw std::runtime_error("column '" + raw.column_names[i] +
                               "' is constant");
    if (distinct.size() < static_cast<size_t>(levels))
      throw std::runtime_error("column '" + raw.column_names[i] + "' has " +
                               std::to_string(distinct.size()) +
                               " distinct values, fewer than " +
                               std::to_string(levels) + " levels");

    auto ranks = min_ranks(col);
    std::vector<uint8_t> bins(n);
    for (size_t t = 0; t < n; ++t)
      bins[t] = static_cast<uint8_t>(
          (static_cast<size_t>(initial_bins) * ranks[t]) / n);
    // relabel to the occupied intervals, keeping order
    std::vector<int> remap(initial_bins, -1);
    int next = 0;
    for (int b = 0; b < initial_bins; ++b) {
      bool used = false;
      for (size_t t = 0; t < n && !used; ++t) used = (bins[t] == b);
      if (used) remap[b] = next++;
    }
    if (next < levels)
      throw std::runtime_error("column '" + raw.column_names[i] +
                               "': ties leave only " + std::to_string(next) +
                               " occupied quantile intervals, fewer than " +
                               std::to_string(levels) + " levels");
    for (auto& b : bins) b = static_cast<uint8_t>(remap[b]);
    disc[i] = std::move(bins);
    card[i] = next;
  }

  // Round-robin interval merging: one merge per over-wide variable per pass,
  // each merge picked to retain the largest summed MI against all other
  // variables at their current discretization. Ties go to the lowest
  // interval index.
  for (;;) {
    bool any = false;
    for (int i = 0; i < nv; ++i) {
      if (card[i] <= levels) continue;
      any = true;
      std::vector<std::vector<std::vector<long long>>> joints;
      joints.reserve(nv);
      for (int j = 0; j < nv; ++j)
        joints.push_back(j == i ? std::vector<std::vector<long long>>{}
                                : joint_counts(disc[i], card[i], disc[j],
                                               card[j]));
      double best = -1e300;
      int best_k = -1;
      for (int k = 0; k + 1 < card[i]; ++k) {
        double retained = 0.0;
        for (int j = 0; j < nv; ++j) {
          if (j == i) continue;
          retained += mi_of_counts(collapse_rows(joints[j], k),
                                   static_cast<long long>(n));
        }
        if (retained > best) {
          best = retained;
          best_k = k;
        }
      }
      for (auto& b : disc[i])
        if (b > best_k) --b;
      --card[i];
    }
    if (!any) break;
  }

  Dataset ds;
  ds.variables.reserve(nv);
  for (int i = 0; i < nv; ++i)
    ds.variables.push_back({raw.column_names[i], levels});
  ds.rows.assign(n, std::vector<uint8_t>(nv));
  for (size_t t = 0; t < n; ++t)
    for (int i = 0; i < nv; ++i) ds.rows[t][i] = disc[i][t];
  return ds;
}

CountTable tabulate_counts(const Dataset& ds, int child,
                           std::vector<int> parents) {
  std::sort(parents.begin(), parents.end());
  if (child < 0 || child >= ds.n())
    throw std::invalid_argument("tabulate_counts: child out of range");
  for (size_t k = 0; k < parents.size(); ++k) {
    int p = parents[k];
    if (p < 0 || p >= ds.n())
      throw std::invalid_argument("tabulate_counts: parent out of range");
    if (p == child)
      throw std::invalid_argument("tabulate_counts: child cannot be a parent");
    if (k > 0 && parents[k] == parents[k - 1])
      throw std::invalid_argument("tabulate_counts: duplicate parent");
  }

  CountTable t;
  t.child = child;
  t.parents = parents;
  t.r = ds.variables[child].cardinality;
  long long q = 1;
  for (int p : parents) q *= ds.variables[p].cardinality;
  if (q > (1 << 24))
    throw std::invalid_argument("tabulate_counts: joint parent state space too large");
  t.q = static_cast<int>(q);
  t.n_ijk.assign(t.q, std::vector<long long>(t.r, 0));
  t.n_ij.assign(t.q, 0);

  for (const auto& row : ds.rows) {
    long long j = 0;
    for (int p : parents)  // ascending order, first parent most significant
      j = j * ds.variables[p].cardinality + row[p];
    ++t.n_ijk[j][row[child]];
    ++t.n_ij[j];
  }
  return t;
}

Dataset forward_sample(const Dag& dag, const CptSet& cpts, size_t n,
                       uint64_t seed) {
  if (static_cast<int>(cpts.theta.size()) != dag.n)
    throw std::invalid_argument("forward_sample: cpt count != node count");
  auto order = topological_order(dag);
  if (!order) throw std::invalid_argument("forward_sample: dag has a cycle");

  Dataset ds;
  ds.variables.reserve(dag.n);
  for (int i = 0; i < dag.n; ++i) {
    if (cpts.theta[i].empty() || cpts.theta[i][0].empty())
      throw std::invalid_argument("forward_sample: empty cpt");
    ds.variables.push_back(
        {dag.names[i], static_cast<int>(cpts.theta[i][0].size())});
  }
  for (int i = 0; i < dag.n; ++i) {
    long long q = 1;
    for (int p : dag.parents_of(i)) q *= ds.variables[p].cardinality;
    if (q != static_cast<long long>(cpts.theta[i].size()))
      throw std::invalid_argument(
          "forward_sample: cpt rows inconsistent with parent cardinalities");
  }

  Rng rng(seed);
  ds.rows.assign(n, std::vector<uint8_t>(dag.n, 0));
  for (size_t t = 0; t < n; ++t) {
    auto& row = ds.rows[t];
    for (int i : *order) {
      long long j = 0;
      for (int p : dag.parents_of(i))
        j = j * ds.variables[p].cardinality + row[p];
      const auto& theta = cpts.theta[i][j];
      double u = rng.uniform();
      double cum = 0.0;
      uint8_t k = static_cast<uint8_t>(theta.size() - 1);
      for (size_t c = 0; c < theta.size(); ++c) {
        cum += theta[c];
        if (u < cum) {
          k = static_cast<uint8_t>(c);
          break;
        }
      }
      row[i] = k;
    }
  }
  return ds;
}

CptSet estimate_cpts(const Dag& dag, const Dataset& ds,
                     const std::optional<PriorScheme>& prior) {
  if (dag.n != ds.n())
    throw std::invalid_argument("estimate_cpts: node count mismatch");
  if (!topological_order(dag))
    throw std::invalid_argument("estimate_cpts: dag has a cycle");

  CptSet out;
  out.theta.resize(dag.n);
  for (int i = 0; i < dag.n; ++i) {
    CountTable t = tabulate_counts(ds, i, dag.parents_of(i));
    auto& theta = out.theta[i];
    theta.assign(t.q, std::vector<double>(t.r, 0.0));
    for (int j = 0; j < t.q; ++j) {
      if (prior) {
        double aj = prior->alpha_ij(t.q, t.r);
        double ak = prior->alpha_ijk(t.q, t.r);
        for (int k = 0; k < t.r; ++k)
          theta[j][k] = (t.n_ijk[j][k] + ak) / (t.n_ij[j] + aj);
      } else if (t.n_ij[j] == 0) {
        for (int k = 0; k < t.r; ++k) theta[j][k] = 1.0 / t.r;
      } else {
        for (int k = 0; k < t.r; ++k)
          theta[j][k] =
              static_cast<double>(t.n_ijk[j][k]) / static_cast<double>(t.n_ij[j]);
      }
    }
  }
  return out;
}

void save_dataset_csv(std::ostream& out, const Dataset& ds) {
  for (int i = 0; i < ds.n(); ++i)
    out << (i ? "," : "") << ds.variables[i].name;
  out << "\n";
  for (const auto& row : ds.rows) {
    for (int i = 0; i < ds.n(); ++i)
      out << (i ? "," : "") << static_cast<int>(row[i]);
    out << "\n";
  }
}

void save_cards(std::ostream& out, const Dataset& ds) {
  for (int i = 0; i < ds.n(); ++i)
    out << (i ? "," : "") << ds.variables[i].cardinality;
  out << "\n";
}

Dataset load_dataset_csv(std::istream& csv,
                         const std::optional<std::string>& cards_line) {
  RawTable raw = load_csv(csv);
  Dataset ds;
  int nv = static_cast<int>(raw.column_names.size());

  std::vector<int> cards(nv, 0);
  if (cards_line) {
    auto fields = split(trim(*cards_line), ',');
    if (static_cast<int>(fields.size()) != nv)
      throw std::runtime_error("cardinality sidecar has " +
                               std::to_string(fields.size()) +
                               " entries, expected " + std::to_string(nv));
    for (int i = 0; i < nv; ++i) cards[i] = std::atoi(trim(fields[i]).c_str());
  }

  for (int i = 0; i < nv; ++i) {
    int maxlev = 0;
    for (double v : raw.columns[i]) {
      double r = std::round(v);
      if (r != v || r < 0 || r > 255)
        throw std::runtime_error("column '" + raw.column_names[i] +
                                 "' is not a small nonnegative integer level");
      maxlev = std::max(maxlev, static_cast<int>(r));
    }
    int card = cards_line ? cards[i] : maxlev + 1;
    if (card < 2)
      throw std::runtime_error("column '" + raw.column_names[i] +
                               "' needs cardinality >= 2");
    if (maxlev >= card)
      throw std::runtime_error("column '" + raw.column_names[i] +
                               "' has level " + std::to_string(maxlev) +
                               " >= cardinality " + std::to_string(card));
    ds.variables.push_back({raw.column_names[i], card});
  }
  ds.rows.assign(raw.n_rows, std::vector<uint8_t>(nv));
  for (size_t t = 0; t < raw.n_rows; ++t)
    for (int i = 0; i < nv; ++i)
      ds.rows[t][i] = static_cast<uint8_t>(raw.columns[i][t]);
  return ds;
}

void save_counts_tsv(std::ostream& out, const CountTable& t,
                     const std::vector<std::string>& names) {
  std::string parents;
  for (size_t k = 0; k < t.parents.size(); ++k)
    parents += (k ? "," : "") + names[t.parents[k]];
  for (int j = 0; j < t.q; ++j)
    for (int k = 0; k < t.r; ++k)
      out << names[t.child] << "\t" << parents << "\t" << j << "\t" << k
          << "\t" << t.n_ijk[j][k] << "\n";
}

}  // namespace bnq
