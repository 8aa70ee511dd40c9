#pragma once
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bnq/dag.hpp"
#include "bnq/score.hpp"

namespace bnq {

using Bits = std::vector<uint8_t>;

// Penalty strengths for the constraint Hamiltonians and the cubic-reduction
// gadget. All strictly positive.
struct PenaltyConfig {
  std::vector<double> delta_max;  // per node
  double delta_trans = 0;
  double delta_consist = 0;
  double delta_reduction = 0;
};

// Fixed variable layout: arc bits d_ij for ordered pairs i != j (row-major),
// then order bits r_ij for i < j (lexicographic), then slack bits y_il
// grouped by node with mu = ceil(log2(m+1)) bits each, then ancilla bits in
// creation order.
class VarRegistry {
 public:
  VarRegistry(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  int mu() const { return mu_; }

  uint32_t d(int i, int j) const;          // arc i -> j
  uint32_t r(int i, int j) const;          // order bit, i < j; 1 means i precedes j
  uint32_t y(int i, int l) const;          // slack bit l of node i
  uint32_t base_size() const;              // without ancillas
  uint32_t size() const;

  // Ancilla representing the product x_va * x_vb; created on first request,
  // shared afterwards.
  uint32_t ancilla(uint32_t va, uint32_t vb);
  const std::vector<std::pair<uint32_t, uint32_t>>& ancillas() const {
    return ancillas_;
  }

  struct Role {
    enum Kind { Arc, Order, Slack, Ancilla } kind;
    int i = -1, j = -1, l = -1;                  // arc/order/slack fields
    std::pair<uint32_t, uint32_t> pair{0, 0};    // ancilla substituted pair
  };
  Role role(uint32_t idx) const;
  std::string legend_line(uint32_t idx) const;

  bool operator==(const VarRegistry& other) const {
    return n_ == other.n_ && m_ == other.m_ && ancillas_ == other.ancillas_;
  }

 private:
  int n_, m_, mu_;
  std::vector<std::pair<uint32_t, uint32_t>> ancillas_;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> ancilla_index_;
};

// Pseudo-Boolean polynomial, degree <= 3 before quadratization. Keys are
// sorted tuples of distinct variable indices; the empty tuple is the
// constant term.
struct PolyTerms {
  std::map<std::vector<uint32_t>, double> terms;

  void add(std::vector<uint32_t> vars, double coeff);
  void add_all(const PolyTerms& other);
  int degree() const;
  double eval(const Bits& x) const;
};

// Strictly quadratic binary program:
// energy(x) = offset + sum linear[v] x_v + sum quadratic[{u,v}] x_u x_v.
struct Qubo {
  VarRegistry reg;
  std::vector<double> linear;
  std::map<std::pair<uint32_t, uint32_t>, double> quadratic;  // u < v
  double offset = 0.0;
};

PolyTerms build_score_hamiltonian(const WeightTable& weights,
                                  const VarRegistry& reg);
PolyTerms build_max_parent_hamiltonian(const VarRegistry& reg, int m,
                                       const PenaltyConfig& pen);
PolyTerms build_cycle_hamiltonian(const VarRegistry& reg,
                                  const PenaltyConfig& pen);

// Replaces each cubic term c * x_a x_b x_c by c * z x_c plus the penalty
// delta_red * (x_a x_b - 2 z x_a - 2 z x_b + 3 z), with z the shared ancilla
// of the lexicographically smallest pair {a,b} of the triple. The registry
// gains the ancillas.
Qubo quadratize(const PolyTerms& poly, VarRegistry reg, double delta_reduction);

// Delta = 1 + sum over nodes of the local-score range; one violation of any
// constraint then always costs more than the whole attainable score
// improvement.
PenaltyConfig calibrate_penalties(const LocalScoreTable& table);

Qubo assemble(const LocalScoreTable& table, int m,
              const std::optional<PenaltyConfig>& pen = std::nullopt);

// Zero-penalty assignment of a DAG: d from the arcs, r from the smallest
// topological order, y_i encoding m - indegree(i), ancillas set to their
// pair products.
Bits encode(const Dag& dag, const VarRegistry& reg);

// Text format: comment lines with the registry, then `q <n_vars> <n_terms>
// <offset>`, then one `<i> <j> <coeff>` line per term (i = j for linear),
// coefficients at 17 significant digits. Bit-exact round trip.
void save_qubo(std::ostream& out, const Qubo& q);
Qubo load_qubo(std::istream& in);
void save_legend(std::ostream& out, const VarRegistry& reg);

}  // namespace bnq
