// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The long-running campaign (criteria 7, 8, 10) is the desk-scale
// stand-in for the published 30-schedule hardware experiment.
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bnq/anneal.hpp"
#include "bnq/dataset.hpp"
#include "bnq/decode.hpp"
#include "bnq/oracle.hpp"
#include "bnq/qubo.hpp"
#include "bnq/rng.hpp"
#include "bnq/score.hpp"
#include "bnq/textfmt.hpp"

using namespace bnq;

namespace {

int g_failures = 0;

void criterion(int id, const std::string& name, bool ok,
               const std::string& detail = "") {
  std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id,
              name.c_str(), detail.empty() ? "" : " — ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

Dataset random_dataset(int n, int rows, uint64_t seed, int card = 2) {
  Rng rng(seed);
  Dataset ds;
  for (int i = 0; i < n; ++i)
    ds.variables.push_back({"v" + std::to_string(i), card});
  for (int t = 0; t < rows; ++t) {
    std::vector<uint8_t> row;
    for (int i = 0; i < n; ++i)
      row.push_back(static_cast<uint8_t>(rng.below(card)));
    ds.rows.push_back(row);
  }
  return ds;
}

LocalScoreTable synthetic_table(int n, int m_max, uint64_t seed) {
  Rng rng(seed);
  LocalScoreTable t;
  t.n = n;
  t.m_max = m_max;
  for (int i = 0; i < n; ++i) t.names.push_back("v" + std::to_string(i));
  t.entries.resize(n);
  for (int i = 0; i < n; ++i)
    for (uint32_t mask : parent_set_masks(n, i, m_max))
      t.entries[i][mask] = 20.0 * rng.uniform() - 10.0;
  return t;
}

// ---- criterion 1: closed-form local scores ----
void criterion_1() {
  Dataset ds;
  ds.variables = {{"x", 2}};
  ds.rows = {{0}, {0}, {0}};
  double s1 = local_score(tabulate_counts(ds, 0, {}), PriorScheme::k2());
  ds.rows = {{0}, {1}};
  double s2 = local_score(tabulate_counts(ds, 0, {}), PriorScheme::k2());
  ds.rows.clear();
  double s3 = local_score(tabulate_counts(ds, 0, {}), PriorScheme::k2());
  bool ok = std::fabs(s1 - std::log(4.0)) < 1e-9 &&
            std::fabs(s2 - std::log(6.0)) < 1e-9 && s3 == 0.0;
  criterion(1, "closed-form local scores (ln 4, ln 6, empty data 0)", ok,
            "got " + fmt_sig(s1, 10) + ", " + fmt_sig(s2, 10) + ", " +
                fmt_sig(s3, 10));
}

// ---- criterion 2: Mobius roundtrip on 100 random tables ----
void criterion_2() {
  double worst = 0.0;
  for (uint64_t k = 0; k < 100; ++k) {
    int n = 2 + static_cast<int>(k % 4);          // 2..5
    int m = 1 + static_cast<int>(k % 3);          // 1..3
    if (m >= n) m = n - 1;
    LocalScoreTable t = synthetic_table(n, m, 1000 + k);
    for (int i = 0; i < n; ++i) {
      auto w = mobius_weights(t, i);
      for (const auto& [mask, s] : t.entries[i]) {
        double sum = 0.0;
        for (uint32_t sub = mask;; sub = (sub - 1) & mask) {
          sum += w.at(sub);
          if (sub == 0) break;
        }
        worst = std::max(worst, std::fabs(sum - s));
      }
    }
  }
  criterion(2, "Mobius roundtrip over 100 random score tables", worst < 1e-9,
            "max |reconstruction - score| = " + fmt_sig(worst, 3));
}

// ---- criterion 3: energy-score faithfulness over all n=4 DAGs ----
void criterion_3() {
  Dataset ds = random_dataset(4, 120, 42, 3);
  LocalScoreTable table = score_table(ds, 3, PriorScheme::k2(), 2);
  Qubo q = assemble(table, 3);

  int n_dags = 0;
  double worst = 0.0;
  bool penalties_clean = true;
  int n_arcs = 4 * 3;
  for (uint32_t mask = 0; mask < (1u << n_arcs); ++mask) {
    Dag g(4, table.names);
    int bit = 0;
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i)
      for (int j = 0; j < 4; ++j) {
        if (i == j) continue;
        if (mask & (1u << bit)) {
          g.add_arc(i, j);
          if (g.indegree(j) > 3) {
            ok = false;
            break;
          }
        }
        ++bit;
      }
    if (!ok || !is_acyclic(g)) continue;
    ++n_dags;
    Bits x = encode(g, q.reg);
    worst = std::max(worst,
                     std::fabs(energy(q, x) - network_score(table, g)));
    // structural zero of every constraint block
    for (int i = 0; i < 4; ++i) {
      int y = 0;
      for (int l = 0; l < q.reg.mu(); ++l) y |= x[q.reg.y(i, l)] << l;
      if (3 - g.indegree(i) - y != 0) penalties_clean = false;
    }
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        int r = x[q.reg.r(i, j)];
        if ((x[q.reg.d(j, i)] && r == 1) || (x[q.reg.d(i, j)] && r == 0))
          penalties_clean = false;
        for (int k = j + 1; k < 4; ++k) {
          int rij = x[q.reg.r(i, j)], rjk = x[q.reg.r(j, k)],
              rik = x[q.reg.r(i, k)];
          if ((rij && rjk && !rik) || (!rij && !rjk && rik))
            penalties_clean = false;
        }
      }
    uint32_t base = q.reg.base_size();
    for (size_t a = 0; a < q.reg.ancillas().size(); ++a) {
      auto [va, vb] = q.reg.ancillas()[a];
      if (x[base + a] != (x[va] & x[vb])) penalties_clean = false;
    }
  }
  criterion(3, "energy(encode(G)) = network_score(G) on all n=4 DAGs",
            n_dags == 543 && worst < 1e-6 && penalties_clean,
            std::to_string(n_dags) + " DAGs, max |diff| = " +
                fmt_sig(worst, 3) +
                (penalties_clean ? ", penalties structurally zero"
                                 : ", PENALTY RESIDUE"));
}

// ---- criterion 4: exhaustive ground states decode to the DP optimum ----
std::string run_criterion_4(bool report_line) {
  std::ostringstream report;
  bool ok = true;
  for (uint64_t k = 0; k < 20; ++k) {
    Dataset ds = random_dataset(3, 40 + static_cast<int>(k), 500 + k, 2);
    LocalScoreTable table = score_table(ds, 2, PriorScheme::k2());
    Qubo q = assemble(table, 2);
    SampleSet ss = solve_exhaustive(q);
    const Read& ground = ss.reads.front();
    Candidate c = decode(ground.x, q, table.names);
    Diagnostics diag = validate(c, 2);
    LearnResult opt = exact_learn(table);
    double got = network_score(table, c.graph);
    bool valid = !diag.has_cycle && diag.parent_cap_violations == 0 &&
                 diag.consistency_violations == 0;
    bool equal = got == opt.score;  // exact: same table, same summation
    ok = ok && valid && equal;
    report << "dataset " << k << ": ground energy " << fmt17(ground.energy)
           << " score " << fmt17(got) << " oracle " << fmt17(opt.score)
           << (valid ? "" : " INVALID") << (equal ? "" : " MISMATCH") << "\n";
  }
  if (report_line)
    criterion(4, "15-bit exhaustive ground states decode to the DP optimum",
              ok, "20 random datasets, exact score equality");
  return report.str();
}

// ---- criterion 5: gadget truth tables ----
void criterion_5() {
  bool ok = true;

  {  // transitivity: exactly the two non-transitive triples, by delta
    VarRegistry reg(3, 2);
    PenaltyConfig pen;
    pen.delta_max.assign(3, 1.0);
    pen.delta_trans = 11.0;
    pen.delta_consist = 13.0;
    pen.delta_reduction = 1.0;
    PolyTerms poly = build_cycle_hamiltonian(reg, pen);
    // with no arc bits set, only H_trans can contribute
    int penalized = 0;
    for (int bits = 0; bits < 8; ++bits) {
      Bits x(reg.size(), 0);
      x[reg.r(0, 1)] = bits & 1;
      x[reg.r(1, 2)] = (bits >> 1) & 1;
      x[reg.r(0, 2)] = (bits >> 2) & 1;
      double e = poly.eval(x);
      bool bad = ((bits & 1) && ((bits >> 1) & 1) && !((bits >> 2) & 1)) ||
                 (!(bits & 1) && !((bits >> 1) & 1) && ((bits >> 2) & 1));
      if (bad) {
        ok = ok && e == 11.0;
        ++penalized;
      } else {
        ok = ok && e == 0.0;
      }
    }
    ok = ok && penalized == 2;
  }

  {  // consistency case table on all 8 assignments
    VarRegistry reg(2, 1);
    PenaltyConfig pen;
    pen.delta_max.assign(2, 1.0);
    pen.delta_trans = 1.0;
    pen.delta_consist = 13.0;
    pen.delta_reduction = 1.0;
    PolyTerms poly = build_cycle_hamiltonian(reg, pen);
    for (int bits = 0; bits < 8; ++bits) {
      int dij = bits & 1, dji = (bits >> 1) & 1, rij = (bits >> 2) & 1;
      Bits x(reg.size(), 0);
      x[reg.d(0, 1)] = dij;
      x[reg.d(1, 0)] = dji;
      x[reg.r(0, 1)] = rij;
      double e = poly.eval(x);
      bool bad = (dji == 1 && rij == 1) || (dij == 1 && rij == 0);
      ok = ok && (bad ? e >= 13.0 : e == 0.0);
    }
  }

  {  // quadratization: min over the ancilla equals the cubic everywhere
    VarRegistry reg(4, 3);
    uint32_t a = reg.d(0, 3), b = reg.d(1, 3), c = reg.d(2, 3);
    for (double coeff : {2.0, -3.5}) {
      PolyTerms poly;
      poly.add({a, b, c}, coeff);
      Qubo q = quadratize(poly, reg, std::fabs(coeff) + 1.0);
      uint32_t z = q.reg.size() - 1;
      for (int bits = 0; bits < 8; ++bits) {
        Bits x(q.reg.size(), 0);
        x[a] = bits & 1;
        x[b] = (bits >> 1) & 1;
        x[c] = (bits >> 2) & 1;
        double cubic = coeff * x[a] * x[b] * x[c];
        x[z] = 0;
        double e0 = energy(q, x);
        x[z] = 1;
        double e1 = energy(q, x);
        ok = ok && std::min(e0, e1) == cubic;
      }
    }
  }

  criterion(5, "gadget truth tables (transitivity, consistency, reduction)",
            ok);
}

// ---- criterion 6: gauge invariance ----
void criterion_6() {
  Rng maker(7);
  Qubo q{VarRegistry(3, 1), {}, {}, 0.0};  // 12 variables
  q.linear.assign(q.reg.size(), 0.0);
  q.offset = maker.normal();
  for (uint32_t v = 0; v < q.reg.size(); ++v) q.linear[v] = 2.0 * maker.normal();
  for (uint32_t u = 0; u < q.reg.size(); ++u)
    for (uint32_t v = u + 1; v < q.reg.size(); ++v)
      if (maker.uniform() < 0.6) q.quadratic[{u, v}] = 2.0 * maker.normal();

  std::vector<double> base;
  for (const auto& r : solve_exhaustive(q).reads) base.push_back(r.energy);

  double worst_spec = 0.0, worst_read = 0.0;
  Rng rng(8);
  Schedule sched = auto_schedule(q, 200);
  for (int trial = 0; trial < 20; ++trial) {
    Gauge g = random_gauge(q.reg.size(), rng);
    Qubo gq = apply_gauge(q, g);
    auto reads = solve_exhaustive(gq).reads;
    for (size_t k = 0; k < base.size(); ++k)
      worst_spec = std::max(worst_spec, std::fabs(reads[k].energy - base[k]));
    SampleSet sa = solve_sa(gq, sched, 20, 900 + trial);
    for (const auto& r : sa.reads)
      worst_read = std::max(
          worst_read, std::fabs(energy(q, ungauge(r.x, g)) - r.energy));
  }
  criterion(6, "gauge-invariant spectra and read energies (20 gauges)",
            worst_spec < 1e-9 && worst_read < 1e-9,
            "max spectrum diff " + fmt_sig(worst_spec, 3) +
                ", max read diff " + fmt_sig(worst_read, 3));
}

// ---- criteria 7, 8, 10: the desk-scale campaign ----
struct DemoRun {
  CampaignReport rep;
  std::string report_text;
  std::string tsv;
  double best_score = 0.0;
  double opt_score = 0.0;
  double empty_score = 0.0;
};

DemoRun run_demo_campaign() {
  const uint64_t kCptSeed = 1;
  std::vector<std::string> names = {"PKC", "PKA", "P38", "JNK",
                                    "RAF", "MEK", "ERK", "AKT"};
  std::ifstream in(std::string(BNQ_DATA_DIR) + "/raf_reference.txt");
  Dag ref = load_reference(in, names);

  Rng rng(mix64(kCptSeed));
  CptSet cpts;
  cpts.theta.resize(8);
  for (int i = 0; i < 8; ++i) {
    int q = 1;
    for (int p : ref.parents_of(i)) {
      (void)p;
      q *= 3;
    }
    for (int j = 0; j < q; ++j) cpts.theta[i].push_back(rng.dirichlet(0.5, 3));
  }
  Dataset ds = forward_sample(ref, cpts, 5000, derive_seed(kCptSeed, 1));
  LocalScoreTable table = score_table(ds, 3, PriorScheme::k2(), 2);
  Qubo q = assemble(table, 3);
  auto scheds = schedule_family(q, 30, 100, 10000);
  CampaignResult camp =
      run_campaign(q, scheds, 300, 5, derive_seed(kCptSeed, 2), 2);

  DemoRun out;
  out.rep = campaign_report(camp.per_schedule, q, ref);
  out.report_text = report_table(out.rep, 14);
  out.tsv = report_tsv(out.rep);

  double best_e = 1e300;
  Bits best_x;
  for (const auto& ss : camp.per_schedule) {
    const Read& r = ss.reads.front();
    if (r.energy < best_e || (r.energy == best_e && r.x < best_x)) {
      best_e = r.energy;
      best_x = r.x;
    }
  }
  Candidate best = decode(best_x, q, names);
  out.best_score = network_score(table, best.graph);
  out.opt_score = exact_learn(table).score;
  out.empty_score = network_score(table, Dag(8, names));
  return out;
}

void criteria_7_8_10() {
  DemoRun first = run_demo_campaign();

  int acyclic = 30 - first.rep.instances_with_cycles;
  bool c7 = acyclic >= 29 && first.rep.median_tp >= 9.0;
  criterion(7, "desk-scale campaign (30 schedules x 300 reads, 5 gauges)", c7,
            std::to_string(acyclic) + "/30 acyclic, median TP " +
                fmt_sig(first.rep.median_tp, 3) + ", mean TP " +
                fmt_sig(first.rep.mean_tp, 3) + ", FP range " +
                std::to_string(first.rep.fp_min) + "-" +
                std::to_string(first.rep.fp_max));

  double range = first.empty_score - first.opt_score;
  double gap = (first.best_score - first.opt_score) / range;
  criterion(8, "best annealed decode within 2% of the oracle optimum",
            gap <= 0.02,
            "gap " + fmt_sig(100.0 * gap, 4) + "% of the " +
                fmt_sig(range, 6) + "-nat range");

  std::string c4_first = run_criterion_4(false);
  std::string c4_second = run_criterion_4(false);
  DemoRun second = run_demo_campaign();
  bool c10 = c4_first == c4_second && first.report_text == second.report_text &&
             first.tsv == second.tsv;
  criterion(10, "criteria 4 and 7 reports are byte-identical on rerun", c10);

  std::printf("%s", first.report_text.c_str());
}

// ---- criterion 9: discretization invariance ----
void criterion_9() {
  Rng rng(90);
  RawTable t;
  t.column_names = {"a", "b", "c", "d"};
  t.n_rows = 300;
  t.columns.resize(4);
  for (size_t k = 0; k < t.n_rows; ++k) {
    double a = rng.normal();
    t.columns[0].push_back(a);
    t.columns[1].push_back(a + 0.5 * rng.normal());
    t.columns[2].push_back(rng.uniform());
    t.columns[3].push_back(rng.normal() - a);
  }
  Dataset base = discretize_hartemink(t, 3, 12);
  RawTable warped = t;
  for (auto& v : warped.columns[0]) v = std::exp(v);
  for (auto& v : warped.columns[1]) v = std::atan(v);
  for (auto& v : warped.columns[2]) v = v * v * v + 2.0 * v;
  for (auto& v : warped.columns[3]) v = 0.01 * v - 5.0;
  Dataset transformed = discretize_hartemink(warped, 3, 12);
  criterion(9, "discretization invariant under strictly increasing transforms",
            transformed == base, "level matrices exactly equal");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  run_criterion_4(true);
  criterion_5();
  criterion_6();
  criterion_9();
  criteria_7_8_10();
  std::printf("%s\n", g_failures == 0 ? "ALL CRITERIA PASS"
                                      : "FAILURES PRESENT");
  return g_failures;
}
