#include "bnq/decode.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bnq/textfmt.hpp"

namespace bnq {

Candidate decode(const Bits& x, const VarRegistry& reg,
                 const std::vector<std::string>& names) {
  if (x.size() != reg.size())
    throw std::invalid_argument("decode: assignment length mismatch");
  int n = reg.n();
  Candidate c;
  c.graph = names.empty() ? Dag(n) : Dag(n, names);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && x[reg.d(i, j)]) c.graph.add_arc(i, j);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c.order_bits.push_back(x[reg.r(i, j)]);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < reg.mu(); ++l) c.slack_bits.push_back(x[reg.y(i, l)]);
  for (uint32_t k = reg.base_size(); k < reg.size(); ++k)
    c.ancilla_bits.push_back(x[k]);
  c.energy = std::nan("");
  return c;
}

Candidate decode(const Bits& x, const Qubo& qubo,
                 const std::vector<std::string>& names) {
  Candidate c = decode(x, qubo.reg, names);
  c.energy = energy(qubo, x);
  return c;
}

namespace {

// r-bit of the pair (i, j), i < j, from the flattened order section
int order_bit_index(int n, int i, int j) {
  return i * n - (i * (i + 1)) / 2 + (j - i - 1);
}

}  // namespace

Diagnostics validate(const Candidate& c, int m) {
  Diagnostics d;
  d.has_cycle = !is_acyclic(c.graph);
  int n = c.graph.n;
  for (int i = 0; i < n; ++i)
    if (c.graph.indegree(i) > m) ++d.parent_cap_violations;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int r = c.order_bits.at(order_bit_index(n, i, j));
      // arc i->j needs i before j (r=1); arc j->i needs j before i (r=0)
      if (c.graph.has_arc(j, i) && r == 1) ++d.consistency_violations;
      if (c.graph.has_arc(i, j) && r == 0) ++d.consistency_violations;
    }
  return d;
}

Metrics metrics(const Candidate& c, const Dag& reference, int m) {
  if (c.graph.n != reference.n || c.graph.names != reference.names)
    throw std::invalid_argument("metrics: node sets differ");
  Metrics out;
  Diagnostics d = validate(c, m);
  out.has_cycle = d.has_cycle;
  out.consistency_violations = d.consistency_violations;
  out.parent_cap_violations = d.parent_cap_violations;
  for (const auto& arc : c.graph.arcs) {
    if (reference.arcs.count(arc)) ++out.true_positives;
    else ++out.false_positives;
  }
  out.false_negatives =
      static_cast<int>(reference.arcs.size()) - out.true_positives;
  return out;
}

Metrics metrics_skeleton(const Candidate& c, const Dag& reference, int m) {
  if (c.graph.n != reference.n || c.graph.names != reference.names)
    throw std::invalid_argument("metrics: node sets differ");
  auto undirect = [](const Dag& g) {
    std::set<std::pair<int, int>> edges;
    for (auto [a, b] : g.arcs) edges.insert({std::min(a, b), std::max(a, b)});
    return edges;
  };
  auto cand = undirect(c.graph);
  auto ref = undirect(reference);
  Metrics out;
  Diagnostics d = validate(c, m);
  out.has_cycle = d.has_cycle;
  out.consistency_violations = d.consistency_violations;
  out.parent_cap_violations = d.parent_cap_violations;
  for (const auto& e : cand) {
    if (ref.count(e)) ++out.true_positives;
    else ++out.false_positives;
  }
  out.false_negatives = static_cast<int>(ref.size()) - out.true_positives;
  return out;
}

CampaignReport campaign_report(const std::vector<SampleSet>& samplesets,
                               const Qubo& qubo, const Dag& reference,
                               bool skeleton) {
  if (samplesets.empty())
    throw std::invalid_argument("campaign_report: no sample sets");
  CampaignReport rep;
  std::vector<int> tps;
  for (size_t s = 0; s < samplesets.size(); ++s) {
    const auto& reads = samplesets[s].reads;
    if (reads.empty())
      throw std::invalid_argument("campaign_report: empty sample set");
    const Read& best = reads.front();
    ScheduleOutcome row;
    row.schedule_id = static_cast<int>(s);
    row.best_energy = best.energy;
    for (const auto& r : reads)
      if (r.energy == best.energy) row.reads_at_best += r.occurrences;
    Candidate c = decode(best.x, qubo, reference.names);
    row.m = skeleton ? metrics_skeleton(c, reference, qubo.reg.m())
                     : metrics(c, reference, qubo.reg.m());
    row.graph = c.graph;
    rep.instances_with_cycles += row.m.has_cycle;
    tps.push_back(row.m.true_positives);
    if (s == 0) {
      rep.fp_min = rep.fp_max = row.m.false_positives;
    } else {
      rep.fp_min = std::min(rep.fp_min, row.m.false_positives);
      rep.fp_max = std::max(rep.fp_max, row.m.false_positives);
    }
    rep.rows.push_back(std::move(row));
  }
  double sum = 0.0;
  for (int t : tps) sum += t;
  rep.mean_tp = sum / tps.size();
  std::sort(tps.begin(), tps.end());
  size_t mid = tps.size() / 2;
  rep.median_tp = tps.size() % 2 ? tps[mid]
                                 : 0.5 * (tps[mid - 1] + tps[mid]);
  return rep;
}

std::string report_table(const CampaignReport& rep, int reference_arcs) {
  std::ostringstream out;
  out << "Campaign summary over " << rep.rows.size()
      << " annealing schedules (reference network: " << reference_arcs
      << " arcs)\n";
  auto row = [&](const std::string& label, const std::string& value) {
    out << "  " << label;
    for (size_t k = label.size(); k < 34; ++k) out << ' ';
    out << value << "\n";
  };
  row("No of instances with cycles", std::to_string(rep.instances_with_cycles));
  row("No of false positives",
      std::to_string(rep.fp_min) + "-" + std::to_string(rep.fp_max));
  row("Average true positives", fmt_sig(rep.mean_tp, 6));
  row("Median of true positives", fmt_sig(rep.median_tp, 6));
  return out.str();
}

std::string report_tsv(const CampaignReport& rep) {
  std::ostringstream out;
  out << "schedule\tbest_energy\treads_at_best\tacyclic\ttp\tfp\tfn\t"
         "consistency_violations\tparent_cap_violations\n";
  for (const auto& r : rep.rows)
    out << r.schedule_id << "\t" << fmt17(r.best_energy) << "\t"
        << r.reads_at_best << "\t" << (r.m.has_cycle ? 0 : 1) << "\t"
        << r.m.true_positives << "\t" << r.m.false_positives << "\t"
        << r.m.false_negatives << "\t" << r.m.consistency_violations << "\t"
        << r.m.parent_cap_violations << "\n";
  return out.str();
}

std::string to_dot(const Dag& dag) {
  std::ostringstream out;
  out << "digraph bn {\n";
  for (const auto& name : dag.names) out << "  \"" << name << "\";\n";
  for (const auto& [from, to] : dag.arcs)
    out << "  \"" << dag.names[from] << "\" -> \"" << dag.names[to] << "\";\n";
  out << "}\n";
  return out.str();
}

Dag load_reference(std::istream& in, const std::vector<std::string>& names) {
  Dag g(static_cast<int>(names.size()), names);
  auto index_of = [&](const std::string& name) {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    throw std::runtime_error("reference network names unknown node '" + name +
                             "'");
  };
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    size_t arrow = line.find("->");
    if (arrow == std::string::npos)
      throw std::runtime_error("reference network line " +
                               std::to_string(lineno) + ": expected SRC -> DST");
    std::string src = trim(line.substr(0, arrow));
    std::string dst = trim(line.substr(arrow + 2));
    g.add_arc(index_of(src), index_of(dst));
  }
  return g;
}

void save_reference(std::ostream& out, const Dag& dag) {
  for (const auto& [from, to] : dag.arcs)
    out << dag.names[from] << " -> " << dag.names[to] << "\n";
}

}  // namespace bnq
