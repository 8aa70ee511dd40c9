#include "bnq/qubo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bnq/textfmt.hpp"

namespace bnq {

VarRegistry::VarRegistry(int n, int m) : n_(n), m_(m) {
  if (n < 1) throw std::invalid_argument("VarRegistry: need at least 1 node");
  if (m < 1) throw std::invalid_argument("VarRegistry: parent cap must be >= 1");
  mu_ = 0;
  while ((1 << mu_) < m + 1) ++mu_;
}

uint32_t VarRegistry::d(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j)
    throw std::invalid_argument("VarRegistry::d: bad arc");
  return static_cast<uint32_t>(i * (n_ - 1) + (j < i ? j : j - 1));
}

uint32_t VarRegistry::r(int i, int j) const {
  if (i < 0 || j <= i || j >= n_)
    throw std::invalid_argument("VarRegistry::r: need 0 <= i < j < n");
  // lexicographic rank of (i, j) among pairs i < j
  uint32_t rank = static_cast<uint32_t>(i) * n_ - (i * (i + 1)) / 2 + (j - i - 1);
  return static_cast<uint32_t>(n_ * (n_ - 1)) + rank;
}

uint32_t VarRegistry::y(int i, int l) const {
  if (i < 0 || i >= n_ || l < 0 || l >= mu_)
    throw std::invalid_argument("VarRegistry::y: bad slack bit");
  return static_cast<uint32_t>(n_ * (n_ - 1) + n_ * (n_ - 1) / 2 + i * mu_ + l);
}

uint32_t VarRegistry::base_size() const {
  return static_cast<uint32_t>(n_ * (n_ - 1) + n_ * (n_ - 1) / 2 + n_ * mu_);
}

uint32_t VarRegistry::size() const {
  return base_size() + static_cast<uint32_t>(ancillas_.size());
}

uint32_t VarRegistry::ancilla(uint32_t va, uint32_t vb) {
  if (va > vb) std::swap(va, vb);
  if (va == vb || vb >= base_size() + ancillas_.size())
    throw std::invalid_argument("VarRegistry::ancilla: bad substituted pair");
  auto key = std::make_pair(va, vb);
  auto it = ancilla_index_.find(key);
  if (it != ancilla_index_.end()) return it->second;
  uint32_t idx = size();
  ancillas_.push_back(key);
  ancilla_index_.emplace(key, idx);
  return idx;
}

VarRegistry::Role VarRegistry::role(uint32_t idx) const {
  Role role{};
  uint32_t nd = static_cast<uint32_t>(n_ * (n_ - 1));
  uint32_t nr = static_cast<uint32_t>(n_ * (n_ - 1) / 2);
  if (idx < nd) {
    role.kind = Role::Arc;
    role.i = static_cast<int>(idx / (n_ - 1));
    int jj = static_cast<int>(idx % (n_ - 1));
    role.j = jj < role.i ? jj : jj + 1;
    return role;
  }
  idx -= nd;
  if (idx < nr) {
    role.kind = Role::Order;
    // invert the lexicographic pair rank
    int i = 0;
    uint32_t row = static_cast<uint32_t>(n_ - 1);
    uint32_t rem = idx;
    while (rem >= row) {
      rem -= row;
      --row;
      ++i;
    }
    role.i = i;
    role.j = i + 1 + static_cast<int>(rem);
    return role;
  }
  idx -= nr;
  if (idx < static_cast<uint32_t>(n_ * mu_)) {
    role.kind = Role::Slack;
    role.i = static_cast<int>(idx) / mu_;
    role.l = static_cast<int>(idx) % mu_;
    return role;
  }
  idx -= static_cast<uint32_t>(n_ * mu_);
  if (idx < ancillas_.size()) {
    role.kind = Role::Ancilla;
    role.pair = ancillas_[idx];
    return role;
  }
  throw std::out_of_range("VarRegistry::role: index out of range");
}

std::string VarRegistry::legend_line(uint32_t idx) const {
  Role ro = role(idx);
  switch (ro.kind) {
    case Role::Arc:
      return "d " + std::to_string(ro.i) + " " + std::to_string(ro.j);
    case Role::Order:
      return "r " + std::to_string(ro.i) + " " + std::to_string(ro.j);
    case Role::Slack:
      return "y " + std::to_string(ro.i) + " " + std::to_string(ro.l);
    case Role::Ancilla: {
      Role a = role(ro.pair.first);
      Role b = role(ro.pair.second);
      if (a.kind == Role::Arc && b.kind == Role::Arc && a.j == b.j)
        return "anc " + std::to_string(a.j) + " {" + std::to_string(a.i) +
               "," + std::to_string(b.i) + "}";
      return "anc pair(" + std::to_string(ro.pair.first) + "," +
             std::to_string(ro.pair.second) + ")";
    }
  }
  return "";
}

void PolyTerms::add(std::vector<uint32_t> vars, double coeff) {
  std::sort(vars.begin(), vars.end());
  for (size_t k = 1; k < vars.size(); ++k)
    if (vars[k] == vars[k - 1])
      throw std::invalid_argument("PolyTerms::add: repeated variable in term");
  terms[std::move(vars)] += coeff;
}

void PolyTerms::add_all(const PolyTerms& other) {
  for (const auto& [vars, c] : other.terms) terms[vars] += c;
}

int PolyTerms::degree() const {
  size_t d = 0;
  for (const auto& [vars, c] : terms) {
    (void)c;
    d = std::max(d, vars.size());
  }
  return static_cast<int>(d);
}

double PolyTerms::eval(const Bits& x) const {
  double e = 0.0;
  for (const auto& [vars, c] : terms) {
    double prod = c;
    for (uint32_t v : vars) prod *= x.at(v);
    e += prod;
  }
  return e;
}

PolyTerms build_score_hamiltonian(const WeightTable& weights,
                                  const VarRegistry& reg) {
  if (weights.n != reg.n())
    throw std::invalid_argument("build_score_hamiltonian: node count mismatch");
  PolyTerms poly;
  for (int i = 0; i < weights.n; ++i) {
    for (const auto& [mask, w] : weights.w[i]) {
      if (mask & (1u << i))
        throw std::invalid_argument(
            "build_score_hamiltonian: weight set contains its own node");
      if (w == 0.0 && mask != 0) continue;
      std::vector<uint32_t> vars;
      for (int j = 0; j < weights.n; ++j)
        if (mask & (1u << j)) vars.push_back(reg.d(j, i));
      poly.add(std::move(vars), w);
    }
  }
  return poly;
}

PolyTerms build_max_parent_hamiltonian(const VarRegistry& reg, int m,
                                       const PenaltyConfig& pen) {
  if (m < 1) throw std::invalid_argument("build_max_parent_hamiltonian: m >= 1");
  if (static_cast<int>(pen.delta_max.size()) != reg.n())
    throw std::invalid_argument(
        "build_max_parent_hamiltonian: need one delta_max per node");
  PolyTerms poly;
  for (int i = 0; i < reg.n(); ++i) {
    double delta = pen.delta_max[i];
    if (delta <= 0.0)
      throw std::invalid_argument("delta_max must be strictly positive");
    // delta * (m - d_i - y_i)^2 with d_i = sum_j d_ji, y_i = sum_l 2^l y_il
    std::vector<std::pair<uint32_t, double>> bits;
    for (int j = 0; j < reg.n(); ++j)
      if (j != i) bits.push_back({reg.d(j, i), 1.0});
    for (int l = 0; l < reg.mu(); ++l)
      bits.push_back({reg.y(i, l), static_cast<double>(1 << l)});

    poly.add({}, delta * m * m);
    for (size_t a = 0; a < bits.size(); ++a) {
      double ca = bits[a].second;
      poly.add({bits[a].first}, delta * (ca * ca - 2.0 * m * ca));
      for (size_t b = a + 1; b < bits.size(); ++b)
        poly.add({bits[a].first, bits[b].first},
                 delta * 2.0 * ca * bits[b].second);
    }
  }
  return poly;
}

PolyTerms build_cycle_hamiltonian(const VarRegistry& reg,
                                  const PenaltyConfig& pen) {
  if (pen.delta_trans <= 0.0 || pen.delta_consist <= 0.0)
    throw std::invalid_argument("cycle penalties must be strictly positive");
  PolyTerms poly;
  int n = reg.n();
  // transitivity: penalized exactly on the two non-transitive order triples
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        uint32_t rij = reg.r(i, j), rik = reg.r(i, k), rjk = reg.r(j, k);
        poly.add({rik}, pen.delta_trans);
        poly.add({rij, rjk}, pen.delta_trans);
        poly.add({rij, rik}, -pen.delta_trans);
        poly.add({rjk, rik}, -pen.delta_trans);
      }
  // consistency: an arc must agree with the order bit of its endpoints
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      uint32_t dij = reg.d(i, j), dji = reg.d(j, i), rij = reg.r(i, j);
      poly.add({dij}, pen.delta_consist);
      poly.add({dji, rij}, pen.delta_consist);
      poly.add({dij, rij}, -pen.delta_consist);
    }
  return poly;
}

Qubo quadratize(const PolyTerms& poly, VarRegistry reg,
                double delta_reduction) {
  if (poly.degree() > 3)
    throw std::invalid_argument("quadratize: degree above 3 is unsupported");
  bool has_cubic = poly.degree() == 3;
  if (has_cubic && delta_reduction <= 0.0)
    throw std::invalid_argument("quadratize: reduction penalty must be positive");

  // first pass fixes the ancilla set (and hence the registry size)
  for (const auto& [vars, c] : poly.terms) {
    (void)c;
    if (vars.size() == 3) reg.ancilla(vars[0], vars[1]);
  }

  Qubo q{std::move(reg), {}, {}, 0.0};
  q.linear.assign(q.reg.size(), 0.0);
  auto add_quad = [&](uint32_t u, uint32_t v, double c) {
    if (u > v) std::swap(u, v);
    q.quadratic[{u, v}] += c;
  };

  for (const auto& [vars, c] : poly.terms) {
    switch (vars.size()) {
      case 0:
        q.offset += c;
        break;
      case 1:
        q.linear[vars[0]] += c;
        break;
      case 2:
        add_quad(vars[0], vars[1], c);
        break;
      case 3: {
        uint32_t a = vars[0], b = vars[1], cc = vars[2];
        uint32_t z = q.reg.ancilla(a, b);  // already created; lookup only
        add_quad(z, cc, c);
        add_quad(a, b, delta_reduction);
        add_quad(a, z, -2.0 * delta_reduction);
        add_quad(b, z, -2.0 * delta_reduction);
        q.linear[z] += 3.0 * delta_reduction;
        break;
      }
      default:
        throw std::invalid_argument("quadratize: degree above 3");
    }
  }
  return q;
}

PenaltyConfig calibrate_penalties(const LocalScoreTable& table) {
  double range_sum = 0.0;
  for (int i = 0; i < table.n; ++i) {
    double lo = 1e300, hi = -1e300;
    for (const auto& [mask, s] : table.entries[i]) {
      (void)mask;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    range_sum += hi - lo;
  }
  double delta = 1.0 + range_sum;

  double wmax3 = 0.0;
  WeightTable wt = mobius_weights(table);
  for (int i = 0; i < table.n; ++i)
    for (const auto& [mask, w] : wt.w[i])
      if (std::popcount(mask) == 3) wmax3 = std::max(wmax3, std::fabs(w));

  PenaltyConfig pen;
  pen.delta_max.assign(table.n, delta);
  pen.delta_trans = delta;
  pen.delta_consist = delta;
  pen.delta_reduction = 1.0 + delta + wmax3;
  return pen;
}

Qubo assemble(const LocalScoreTable& table, int m,
              const std::optional<PenaltyConfig>& pen_in) {
  if (m > 3)
    throw std::invalid_argument("assemble: parent caps above 3 are unsupported");
  if (table.m_max > 3)
    throw std::invalid_argument("assemble: score tables above m_max 3 are unsupported");
  if (m < 1) throw std::invalid_argument("assemble: m must be >= 1");
  if (m > table.m_max)
    throw std::invalid_argument(
        "assemble: parent cap exceeds the score table's m_max");

  PenaltyConfig pen = pen_in ? *pen_in : calibrate_penalties(table);
  if (static_cast<int>(pen.delta_max.size()) == 1 && table.n > 1)
    pen.delta_max.assign(table.n, pen.delta_max[0]);

  VarRegistry reg(table.n, m);
  WeightTable weights = mobius_weights(table);
  PolyTerms poly = build_score_hamiltonian(weights, reg);
  poly.add_all(build_max_parent_hamiltonian(reg, m, pen));
  poly.add_all(build_cycle_hamiltonian(reg, pen));
  return quadratize(std::move(poly), std::move(reg), pen.delta_reduction);
}

Bits encode(const Dag& dag, const VarRegistry& reg) {
  if (dag.n != reg.n())
    throw std::invalid_argument("encode: node count mismatch");
  auto order = topological_order(dag);
  if (!order) throw std::invalid_argument("encode: dag has a cycle");
  for (int i = 0; i < dag.n; ++i)
    if (dag.indegree(i) > reg.m())
      throw std::invalid_argument("encode: node " + std::to_string(i) +
                                  " exceeds the parent cap");

  Bits x(reg.size(), 0);
  for (const auto& [from, to] : dag.arcs) x[reg.d(from, to)] = 1;

  std::vector<int> pos(dag.n);
  for (int k = 0; k < dag.n; ++k) pos[(*order)[k]] = k;
  for (int i = 0; i < dag.n; ++i)
    for (int j = i + 1; j < dag.n; ++j)
      x[reg.r(i, j)] = pos[i] < pos[j] ? 1 : 0;

  for (int i = 0; i < dag.n; ++i) {
    int slack = reg.m() - dag.indegree(i);
    for (int l = 0; l < reg.mu(); ++l) x[reg.y(i, l)] = (slack >> l) & 1;
  }

  uint32_t base = reg.base_size();
  for (size_t k = 0; k < reg.ancillas().size(); ++k) {
    auto [va, vb] = reg.ancillas()[k];
    x[base + k] = x[va] & x[vb];
  }
  return x;
}

void save_qubo(std::ostream& out, const Qubo& q) {
  out << "# bnq qubo v1\n";
  out << "# n " << q.reg.n() << "\n";
  out << "# m " << q.reg.m() << "\n";
  for (const auto& [va, vb] : q.reg.ancillas())
    out << "# anc " << va << " " << vb << "\n";
  for (uint32_t v = 0; v < q.reg.size(); ++v)
    out << "# var " << v << " " << q.reg.legend_line(v) << "\n";

  size_t n_terms = q.quadratic.size();
  for (double c : q.linear) n_terms += (c != 0.0);
  out << "q " << q.reg.size() << " " << n_terms << " " << fmt17(q.offset)
      << "\n";
  for (uint32_t v = 0; v < q.reg.size(); ++v)
    if (q.linear[v] != 0.0)
      out << v << " " << v << " " << fmt17(q.linear[v]) << "\n";
  for (const auto& [pair, c] : q.quadratic)
    out << pair.first << " " << pair.second << " " << fmt17(c) << "\n";
}

Qubo load_qubo(std::istream& in) {
  int n = -1, m = -1;
  std::vector<std::pair<uint32_t, uint32_t>> anc;
  std::string line;
  long long n_vars = -1, n_terms = -1;
  double offset = 0.0;

  // header and comments
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tag;
      ss >> tag;
      if (tag == "n") ss >> n;
      else if (tag == "m") ss >> m;
      else if (tag == "anc") {
        uint32_t a, b;
        ss >> a >> b;
        anc.push_back({a, b});
      }
      continue;
    }
    if (line[0] == 'q') {
      std::istringstream ss(line.substr(1));
      std::string off;
      ss >> n_vars >> n_terms >> off;
      offset = std::strtod(off.c_str(), nullptr);
      break;
    }
    throw std::runtime_error("qubo file: unexpected line before header: " + line);
  }
  if (n < 1 || m < 1) throw std::runtime_error("qubo file: missing registry header");
  if (n_vars < 0) throw std::runtime_error("qubo file: missing q header line");

  VarRegistry reg(n, m);
  for (auto [a, b] : anc) reg.ancilla(a, b);
  if (reg.size() != static_cast<uint32_t>(n_vars))
    throw std::runtime_error("qubo file: variable count disagrees with registry");

  Qubo q{std::move(reg), {}, {}, offset};
  q.linear.assign(q.reg.size(), 0.0);
  long long seen = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    uint32_t i, j;
    std::string c;
    if (!(ss >> i >> j >> c))
      throw std::runtime_error("qubo file: bad term line: " + line);
    double coeff = std::strtod(c.c_str(), nullptr);
    if (i > j) std::swap(i, j);
    if (j >= q.reg.size())
      throw std::runtime_error("qubo file: term index out of range");
    if (i == j) q.linear[i] += coeff;
    else q.quadratic[{i, j}] += coeff;
    ++seen;
  }
  if (seen != n_terms)
    throw std::runtime_error("qubo file: expected " + std::to_string(n_terms) +
                             " terms, found " + std::to_string(seen));
  return q;
}

void save_legend(std::ostream& out, const VarRegistry& reg) {
  for (uint32_t v = 0; v < reg.size(); ++v)
    out << v << "\t" << reg.legend_line(v) << "\n";
}

}  // namespace bnq
