#pragma once
#include <iosfwd>
#include <string>
#include <vector>

#include "bnq/anneal.hpp"
#include "bnq/dag.hpp"
#include "bnq/qubo.hpp"

namespace bnq {

// A solver assignment split into its registry sections. The graph may be
// cyclic; validation is a separate step.
struct Candidate {
  Dag graph;
  std::vector<uint8_t> order_bits;
  std::vector<uint8_t> slack_bits;
  std::vector<uint8_t> ancilla_bits;
  double energy = 0.0;
};

struct Diagnostics {
  bool has_cycle = false;
  int parent_cap_violations = 0;   // nodes with indegree above m
  int consistency_violations = 0;  // arcs disagreeing with the order bits
};

struct Metrics {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  bool has_cycle = false;
  int consistency_violations = 0;
  int parent_cap_violations = 0;
};

Candidate decode(const Bits& x, const VarRegistry& reg,
                 const std::vector<std::string>& names = {});
Candidate decode(const Bits& x, const Qubo& qubo,
                 const std::vector<std::string>& names = {});

Diagnostics validate(const Candidate& c, int m);

// Orientation-exact arc counts against a reference network (a reversed arc
// is one false positive plus one false negative).
Metrics metrics(const Candidate& c, const Dag& reference, int m);

// Skeleton-level variant: arc orientation ignored on both sides.
Metrics metrics_skeleton(const Candidate& c, const Dag& reference, int m);

struct ScheduleOutcome {
  int schedule_id = 0;
  double best_energy = 0.0;
  int reads_at_best = 0;
  Metrics m;
  Dag graph;
};

struct CampaignReport {
  std::vector<ScheduleOutcome> rows;
  int instances_with_cycles = 0;
  int fp_min = 0, fp_max = 0;
  double mean_tp = 0.0;
  double median_tp = 0.0;
};

// Per schedule, decodes the best read (lowest energy, ties to the smallest
// assignment) and aggregates the four summary rows. Orientation-exact by
// default; `skeleton` switches to the undirected metric.
CampaignReport campaign_report(const std::vector<SampleSet>& samplesets,
                               const Qubo& qubo, const Dag& reference,
                               bool skeleton = false);

std::string report_table(const CampaignReport& rep, int reference_arcs);
std::string report_tsv(const CampaignReport& rep);

// Deterministic DOT: nodes in declaration order, arcs sorted.
std::string to_dot(const Dag& dag);

// One arc per line, "SRC -> DST"; node set fixed by `names`.
Dag load_reference(std::istream& in, const std::vector<std::string>& names);
void save_reference(std::ostream& out, const Dag& dag);

}  // namespace bnq
