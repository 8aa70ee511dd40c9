#pragma once
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bnq/dag.hpp"
#include "bnq/prior.hpp"

namespace bnq {

// Raw numeric table as parsed from CSV, column-major.
struct RawTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;
  size_t n_rows = 0;
};

struct Variable {
  std::string name;
  int cardinality = 0;  // declared level count; levels may be unobserved
};

inline bool operator==(const Variable& a, const Variable& b) {
  return a.name == b.name && a.cardinality == b.cardinality;
}

// Discrete dataset: every cell is a level index below its variable's
// cardinality.
struct Dataset {
  std::vector<Variable> variables;
  std::vector<std::vector<uint8_t>> rows;  // row-major

  int n() const { return static_cast<int>(variables.size()); }
  size_t n_rows() const { return rows.size(); }
  std::vector<std::string> names() const;
};

bool operator==(const Dataset& a, const Dataset& b);

// Sufficient statistics of one (child, parent set) family. Joint parent
// state j is the mixed-radix encoding of parent levels, parents in ascending
// variable order, first parent most significant.
struct CountTable {
  int child = -1;
  std::vector<int> parents;  // ascending
  int q = 1;                 // number of joint parent states
  int r = 0;                 // child cardinality
  std::vector<std::vector<long long>> n_ijk;  // q x r
  std::vector<long long> n_ij;                // row sums
};

// Conditional probability tables, one q_i x r_i stochastic matrix per node,
// rows indexed by the same joint parent state as CountTable.
struct CptSet {
  std::vector<std::vector<std::vector<double>>> theta;
};

// Parses header + numeric rows. Throws std::runtime_error naming the data
// row on ragged or non-numeric input.
RawTable load_csv(std::istream& in);
RawTable load_csv_file(const std::string& path);

// Joint discretization: equal-frequency (rank quantile) initial binning into
// `initial_bins` intervals, then round-robin adjacent-interval merges, each
// chosen to minimize the loss of the summed pairwise mutual information on
// the current discretization. Output cardinality is exactly `levels`.
Dataset discretize_hartemink(const RawTable& raw, int levels, int initial_bins);

CountTable tabulate_counts(const Dataset& ds, int child, std::vector<int> parents);

// Ancestral sampling in topological order; deterministic for a fixed seed.
Dataset forward_sample(const Dag& dag, const CptSet& cpts, size_t n, uint64_t seed);

// theta_ijk = (N_ijk + alpha_ijk) / (N_ij + alpha_ij). Without a prior this
// is the MLE, with unobserved parent configurations falling back to uniform.
CptSet estimate_cpts(const Dag& dag, const Dataset& ds,
                     const std::optional<PriorScheme>& prior);

// Dataset CSV (integer levels) plus one-line cardinality sidecar.
void save_dataset_csv(std::ostream& out, const Dataset& ds);
void save_cards(std::ostream& out, const Dataset& ds);
Dataset load_dataset_csv(std::istream& csv,
                         const std::optional<std::string>& cards_line);

// Counts in TSV: child, parents, j, k, count — one line per nonzero-capable
// cell, for CLI inspection.
void save_counts_tsv(std::ostream& out, const CountTable& t,
                     const std::vector<std::string>& names);

}  // namespace bnq
