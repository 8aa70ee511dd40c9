// bnq — Bayesian network structure learning by QUBO annealing.
//
// Pipeline: discretize raw measurements, score parent sets with a
// Bayesian-Dirichlet prior, compile the search into a QUBO, solve it by
// simulated annealing (or exhaustively), and decode/evaluate the networks.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "bnq/anneal.hpp"
#include "bnq/dataset.hpp"
#include "bnq/decode.hpp"
#include "bnq/oracle.hpp"
#include "bnq/qubo.hpp"
#include "bnq/score.hpp"
#include "bnq/textfmt.hpp"

namespace fs = std::filesystem;
using namespace bnq;

namespace {

struct SolverQualityFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!fs::exists(path))
    throw std::runtime_error("file does not exist: " + path);
}

std::string slurp(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

Dataset load_discrete(const std::string& csv_path,
                      const std::string& cards_path) {
  require_file(csv_path);
  std::ifstream csv(csv_path);
  std::optional<std::string> cards;
  std::string cp = cards_path;
  if (cp.empty() && fs::exists(csv_path + ".cards")) cp = csv_path + ".cards";
  if (!cp.empty()) {
    std::ifstream cs(cp);
    if (!cs) throw std::runtime_error("cannot open cardinality sidecar: " + cp);
    std::string line;
    std::getline(cs, line);
    cards = line;
  }
  try {
    return load_dataset_csv(csv, cards);
  } catch (const std::exception& e) {
    throw std::runtime_error(csv_path + ": " + e.what());
  }
}

PriorScheme make_prior(const std::string& kind, double ess) {
  if (kind == "k2") return PriorScheme::k2();
  if (kind == "bdeu") return PriorScheme::bdeu(ess);
  throw std::runtime_error("unknown prior '" + kind + "' (use k2 or bdeu)");
}

struct DiscretizeOpts {
  std::string input, cards, out_dir = ".";
  int levels = 3, initial_bins = 12;
  bool passthrough = false;
};

void run_discretize(const DiscretizeOpts& o) {
  Dataset ds;
  if (o.passthrough) {
    ds = load_discrete(o.input, o.cards);
  } else {
    RawTable raw = load_csv_file(o.input);
    ds = discretize_hartemink(raw, o.levels, o.initial_bins);
  }
  std::ostringstream csv, cards;
  save_dataset_csv(csv, ds);
  save_cards(cards, ds);
  write_file(fs::path(o.out_dir) / "dataset.csv", csv.str());
  write_file(fs::path(o.out_dir) / "dataset.csv.cards", cards.str());
  std::cout << "wrote " << (fs::path(o.out_dir) / "dataset.csv").string()
            << " (" << ds.n_rows() << " rows, " << ds.n() << " variables)\n";
}

struct ScoreOpts {
  std::string input, cards, out_dir = ".";
  int m_max = 3;
  std::string prior = "k2";
  double ess = 1.0;
  int threads = 2;
  std::string counts;  // "child" or "child:p1,p2" — dump one count table
};

void run_score(const ScoreOpts& o) {
  Dataset ds = load_discrete(o.input, o.cards);
  if (!o.counts.empty()) {
    auto head_tail = split(o.counts, ':');
    auto names = ds.names();
    auto index_of = [&](const std::string& name) {
      for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == trim(name)) return static_cast<int>(i);
      throw std::runtime_error("unknown variable '" + trim(name) + "'");
    };
    int child = index_of(head_tail[0]);
    std::vector<int> parents;
    if (head_tail.size() > 1 && !trim(head_tail[1]).empty())
      for (const auto& p : split(head_tail[1], ','))
        parents.push_back(index_of(p));
    save_counts_tsv(std::cout, tabulate_counts(ds, child, parents), names);
    return;
  }
  LocalScoreTable table =
      score_table(ds, o.m_max, make_prior(o.prior, o.ess), o.threads);
  std::ostringstream out;
  save_score_table(out, table);
  write_file(fs::path(o.out_dir) / "scores.tsv", out.str());
  size_t entries = 0;
  for (const auto& e : table.entries) entries += e.size();
  std::cout << "wrote " << (fs::path(o.out_dir) / "scores.tsv").string()
            << " (" << entries << " entries)\n";
}

struct BuildOpts {
  std::string scores, out_dir = ".";
  int m = 0;  // 0: use the score table's m_max
  double pen_max = 0, pen_trans = 0, pen_consist = 0, pen_reduction = 0;
};

void run_build(BuildOpts o) {
  std::istringstream in(slurp(o.scores));
  LocalScoreTable table = load_score_table(in);
  if (o.m == 0) o.m = table.m_max;
  std::optional<PenaltyConfig> pen;
  int given = (o.pen_max > 0) + (o.pen_trans > 0) + (o.pen_consist > 0) +
              (o.pen_reduction > 0);
  if (given == 4) {
    PenaltyConfig p;
    p.delta_max.assign(table.n, o.pen_max);
    p.delta_trans = o.pen_trans;
    p.delta_consist = o.pen_consist;
    p.delta_reduction = o.pen_reduction;
    pen = p;
  } else if (given != 0) {
    throw std::runtime_error(
        "penalties must be given all together (max, trans, consist, "
        "reduction) or not at all");
  }
  Qubo q = assemble(table, o.m, pen);
  std::ostringstream qout, lout;
  save_qubo(qout, q);
  save_legend(lout, q.reg);
  write_file(fs::path(o.out_dir) / "problem.qubo", qout.str());
  write_file(fs::path(o.out_dir) / "problem.legend", lout.str());
  std::cout << "wrote " << (fs::path(o.out_dir) / "problem.qubo").string()
            << " (" << q.reg.size() << " variables)\n";
}

struct SolveOpts {
  std::string qubo, scores, reference, out_dir = ".";
  int schedules = 30, sweeps_min = 100, sweeps_max = 10000;
  int reads = 300, gauges = 5;
  uint64_t seed = 0;
  int threads = 2;
  bool exhaustive = false, require_optimal = false, skeleton = false;
};

// shared by solve and pipeline once the inputs are in memory
int solve_and_report(const SolveOpts& o, const Qubo& q,
                     const std::optional<LocalScoreTable>& table,
                     const std::optional<Dag>& reference) {
  std::vector<std::string> names =
      table ? table->names : std::vector<std::string>{};
  std::ostringstream report;

  std::optional<LearnResult> oracle;
  double empty_score = 0.0;
  if (table) {
    oracle = exact_learn(*table);
    empty_score = network_score(*table, Dag(table->n, table->names));
  }

  Candidate best;
  if (o.exhaustive) {
    if (q.reg.size() > 26)
      throw std::runtime_error(
          "exhaustive solve needs at most 26 variables, problem has " +
          std::to_string(q.reg.size()));
    SampleSet ss = solve_exhaustive(q, 64);
    best = decode(ss.reads.front().x, q, names);
    report << "exhaustive ground energy\t" << fmt17(best.energy) << "\n";
  } else {
    auto scheds = schedule_family(q, o.schedules, o.sweeps_min, o.sweeps_max);
    CampaignResult camp =
        run_campaign(q, scheds, o.reads, o.gauges, o.seed, o.threads);
    std::ostringstream reads_out;
    save_reads(reads_out, camp);
    write_file(fs::path(o.out_dir) / "reads.txt", reads_out.str());

    // best read across all schedules
    Bits best_x;
    double best_e = 0.0;
    bool first = true;
    for (const auto& ss : camp.per_schedule) {
      const Read& r = ss.reads.front();
      if (first || r.energy < best_e ||
          (r.energy == best_e && r.x < best_x)) {
        best_e = r.energy;
        best_x = r.x;
        first = false;
      }
    }
    best = decode(best_x, q, names);
    report << "schedules\t" << scheds.size() << "\n";
    report << "reads per schedule\t" << o.reads << "\n";
    report << "gauges per schedule\t" << o.gauges << "\n";
    report << "best energy\t" << fmt17(best_e) << "\n";

    auto schedule_dot = [&](size_t s, const Dag& g) {
      char name[32];
      std::snprintf(name, sizeof(name), "schedule_%02zu.dot", s);
      write_file(fs::path(o.out_dir) / name, to_dot(g));
    };
    if (reference) {
      CampaignReport rep =
          campaign_report(camp.per_schedule, q, *reference, o.skeleton);
      write_file(fs::path(o.out_dir) / "campaign.tsv", report_tsv(rep));
      for (size_t s = 0; s < rep.rows.size(); ++s)
        schedule_dot(s, rep.rows[s].graph);
      report << "\n"
             << report_table(rep,
                             static_cast<int>(reference->arcs.size()));
    } else {
      // reduced summary: no reference metrics available
      std::ostringstream tsv;
      tsv << "schedule\tbest_energy\treads_at_best\tacyclic\n";
      for (size_t s = 0; s < camp.per_schedule.size(); ++s) {
        const Read& r = camp.per_schedule[s].reads.front();
        int at_best = 0;
        for (const auto& rr : camp.per_schedule[s].reads)
          if (rr.energy == r.energy) at_best += rr.occurrences;
        Candidate c = decode(r.x, q.reg, names);
        tsv << s << "\t" << fmt17(r.energy) << "\t" << at_best << "\t"
            << (is_acyclic(c.graph) ? 1 : 0) << "\n";
        schedule_dot(s, c.graph);
      }
      write_file(fs::path(o.out_dir) / "campaign.tsv", tsv.str());
    }
  }

  Diagnostics diag = validate(best, q.reg.m());
  report << "best decode acyclic\t" << (diag.has_cycle ? "no" : "yes") << "\n";
  report << "best decode arcs\t" << best.graph.arcs.size() << "\n";

  bool optimal = false;
  if (table && !diag.has_cycle && diag.parent_cap_violations == 0) {
    double got = network_score(*table, best.graph);
    report << "best decode score\t" << fmt17(got) << "\n";
    report << "oracle optimal score\t" << fmt17(oracle->score) << "\n";
    double range = empty_score - oracle->score;
    double gap = range > 0 ? (got - oracle->score) / range : 0.0;
    report << "score gap vs oracle\t" << fmt_sig(100.0 * gap, 6) << "%\n";
    optimal = got <= oracle->score + 1e-6;
    if (o.exhaustive)
      report << "certified optimal\t" << (optimal ? "yes" : "no") << "\n";
  }

  write_file(fs::path(o.out_dir) / "best.dot", to_dot(best.graph));
  std::ostringstream arcs;
  save_reference(arcs, best.graph);
  write_file(fs::path(o.out_dir) / "best.arcs", arcs.str());
  write_file(fs::path(o.out_dir) / "report.txt", report.str());
  std::cout << report.str();

  if (o.require_optimal) {
    if (!table)
      throw std::runtime_error("--require-optimal needs --scores");
    if (!optimal) {
      std::cerr << "solver result is not optimal\n";
      return 1;
    }
  }
  return 0;
}

int run_solve(const SolveOpts& o) {
  std::istringstream qin(slurp(o.qubo));
  Qubo q = load_qubo(qin);
  std::optional<LocalScoreTable> table;
  if (!o.scores.empty()) {
    std::istringstream sin(slurp(o.scores));
    table = load_score_table(sin);
  }
  std::optional<Dag> reference;
  if (!o.reference.empty()) {
    if (!table)
      throw std::runtime_error("--reference needs --scores for node names");
    std::istringstream rin(slurp(o.reference));
    reference = load_reference(rin, table->names);
  }
  return solve_and_report(o, q, table, reference);
}

struct PipelineOpts {
  DiscretizeOpts disc;
  ScoreOpts score;
  BuildOpts build;
  SolveOpts solve;
  std::string out_dir = ".";
};

int run_pipeline(PipelineOpts& o) {
  o.disc.out_dir = o.score.out_dir = o.build.out_dir = o.solve.out_dir =
      o.out_dir;
  run_discretize(o.disc);
  o.score.input = (fs::path(o.disc.out_dir) / "dataset.csv").string();
  o.score.cards = (fs::path(o.disc.out_dir) / "dataset.csv.cards").string();
  run_score(o.score);
  o.build.scores = (fs::path(o.score.out_dir) / "scores.tsv").string();
  run_build(o.build);
  o.solve.qubo = (fs::path(o.build.out_dir) / "problem.qubo").string();
  o.solve.scores = o.build.scores;
  return run_solve(o.solve);
}

struct EvalOpts {
  std::string candidate, reference, nodes;
  bool skeleton = false;
};

void run_eval(const EvalOpts& o) {
  auto scan_names = [](const std::string& path, std::set<std::string>& into) {
    std::istringstream in(slurp(path));
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      size_t arrow = line.find("->");
      if (arrow == std::string::npos) continue;
      into.insert(trim(line.substr(0, arrow)));
      into.insert(trim(line.substr(arrow + 2)));
    }
  };
  std::vector<std::string> names;
  if (!o.nodes.empty()) {
    for (auto& n : split(o.nodes, ',')) names.push_back(trim(n));
  } else {
    std::set<std::string> set;
    scan_names(o.candidate, set);
    scan_names(o.reference, set);
    names.assign(set.begin(), set.end());
  }
  std::istringstream cin_(slurp(o.candidate)), rin(slurp(o.reference));
  Dag cand = load_reference(cin_, names);
  Dag ref = load_reference(rin, names);

  Candidate c;
  c.graph = cand;
  c.order_bits.assign(cand.n * (cand.n - 1) / 2, 0);
  Metrics m = o.skeleton ? metrics_skeleton(c, ref, cand.n)
                         : metrics(c, ref, cand.n);
  std::cout << "true_positives\t" << m.true_positives << "\n"
            << "false_positives\t" << m.false_positives << "\n"
            << "false_negatives\t" << m.false_negatives << "\n"
            << "acyclic\t" << (is_acyclic(cand) ? "yes" : "no") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian network structure learning by QUBO annealing"};
  app.require_subcommand(1);
  // key = value file with one [section] per subcommand, e.g.
  //   [pipeline]
  //   seed = 7
  app.set_config("--config")->check(CLI::ExistingFile);
  app.allow_config_extras(false);

  DiscretizeOpts d;
  auto* cd = app.add_subcommand("discretize",
                                "Discretize raw CSV measurements jointly");
  cd->add_option("--input", d.input, "raw CSV (or discrete CSV with --passthrough)")
      ->required();
  cd->add_option("--levels", d.levels, "target level count");
  cd->add_option("--initial-bins", d.initial_bins, "initial quantile intervals");
  cd->add_flag("--passthrough", d.passthrough,
               "input is already discrete; copy it through");
  cd->add_option("--cards", d.cards, "cardinality sidecar for --passthrough");
  cd->add_option("--out-dir", d.out_dir, "output directory");

  ScoreOpts s;
  auto* cs = app.add_subcommand("score", "Score all admissible parent sets");
  cs->add_option("--input", s.input, "discrete dataset CSV")->required();
  cs->add_option("--cards", s.cards, "cardinality sidecar");
  cs->add_option("--m-max", s.m_max, "maximum parent-set size");
  cs->add_option("--prior", s.prior, "k2 or bdeu");
  cs->add_option("--ess", s.ess, "BDeu equivalent sample size");
  cs->add_option("--threads", s.threads, "worker threads");
  cs->add_option("--counts", s.counts,
                 "print one count table (child or child:p1,p2) and exit");
  cs->add_option("--out-dir", s.out_dir, "output directory");

  BuildOpts b;
  auto* cb = app.add_subcommand("build", "Assemble the QUBO");
  cb->add_option("--scores", b.scores, "score table TSV")->required();
  cb->add_option("--m", b.m, "parent cap (at most 3; default: the table's m_max)");
  cb->add_option("--penalty-max", b.pen_max, "override: parent-cap penalty");
  cb->add_option("--penalty-trans", b.pen_trans, "override: transitivity penalty");
  cb->add_option("--penalty-consist", b.pen_consist, "override: consistency penalty");
  cb->add_option("--penalty-reduction", b.pen_reduction, "override: ancilla penalty");
  cb->add_option("--out-dir", b.out_dir, "output directory");

  SolveOpts so;
  auto* cso = app.add_subcommand("solve", "Solve a QUBO and decode networks");
  cso->add_option("--qubo", so.qubo, "QUBO file")->required();
  cso->add_option("--scores", so.scores, "score table (enables oracle checks)");
  cso->add_option("--reference", so.reference, "reference network file");
  cso->add_option("--schedules", so.schedules, "number of annealing schedules");
  cso->add_option("--sweeps-min", so.sweeps_min, "sweeps of the fastest schedule");
  cso->add_option("--sweeps-max", so.sweeps_max, "sweeps of the slowest schedule");
  cso->add_option("--reads", so.reads, "reads per schedule");
  cso->add_option("--gauges", so.gauges, "gauges per schedule");
  cso->add_option("--seed", so.seed, "campaign seed")->required();
  cso->add_option("--threads", so.threads, "worker threads");
  cso->add_flag("--exhaustive", so.exhaustive, "enumerate instead of annealing");
  cso->add_flag("--require-optimal", so.require_optimal,
                "exit 1 unless the oracle optimum is reached");
  cso->add_flag("--skeleton", so.skeleton, "undirected comparison metrics");
  cso->add_option("--out-dir", so.out_dir, "output directory");

  PipelineOpts p;
  auto* cp = app.add_subcommand("pipeline", "Run the whole flow end to end");
  cp->add_option("--input", p.disc.input, "input CSV")->required();
  cp->add_flag("--passthrough", p.disc.passthrough, "input is already discrete");
  cp->add_option("--cards", p.disc.cards, "cardinality sidecar");
  cp->add_option("--levels", p.disc.levels, "target level count");
  cp->add_option("--initial-bins", p.disc.initial_bins, "initial quantile intervals");
  cp->add_option("--m-max", p.score.m_max, "maximum parent-set size");
  cp->add_option("--prior", p.score.prior, "k2 or bdeu");
  cp->add_option("--ess", p.score.ess, "BDeu equivalent sample size");
  cp->add_option("--schedules", p.solve.schedules, "number of annealing schedules");
  cp->add_option("--sweeps-min", p.solve.sweeps_min, "sweeps of the fastest schedule");
  cp->add_option("--sweeps-max", p.solve.sweeps_max, "sweeps of the slowest schedule");
  cp->add_option("--reads", p.solve.reads, "reads per schedule");
  cp->add_option("--gauges", p.solve.gauges, "gauges per schedule");
  cp->add_option("--seed", p.solve.seed, "campaign seed")->required();
  cp->add_option("--threads", p.solve.threads, "worker threads");
  cp->add_option("--reference", p.solve.reference, "reference network file");
  cp->add_flag("--exhaustive", p.solve.exhaustive, "enumerate instead of annealing");
  cp->add_flag("--require-optimal", p.solve.require_optimal,
               "exit 1 unless the oracle optimum is reached");
  cp->add_flag("--skeleton", p.solve.skeleton, "undirected comparison metrics");
  cp->add_option("--out-dir", p.out_dir, "output directory");

  EvalOpts e;
  auto* ce = app.add_subcommand("eval", "Compare two network files");
  ce->add_option("--candidate", e.candidate, "candidate arc list")->required();
  ce->add_option("--reference", e.reference, "reference arc list")->required();
  ce->add_option("--nodes", e.nodes, "comma-separated node names");
  ce->add_flag("--skeleton", e.skeleton, "undirected comparison metrics");

  int rc = 0;
  cd->callback([&] { run_discretize(d); });
  cs->callback([&] { run_score(s); });
  cb->callback([&] { run_build(b); });
  cso->callback([&] { rc = run_solve(so); });
  cp->callback([&] { rc = run_pipeline(p); });
  ce->callback([&] { run_eval(e); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return rc;
}
