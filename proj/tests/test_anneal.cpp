#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnq/anneal.hpp"
#include "bnq/rng.hpp"
#include "bnq/score.hpp"

using namespace bnq;

namespace {

// 12-variable registry for handmade problems
Qubo empty_qubo_12() {
  Qubo q{VarRegistry(3, 1), {}, {}, 0.0};
  q.linear.assign(q.reg.size(), 0.0);
  return q;
}

Qubo random_qubo_12(uint64_t seed, double density = 0.5) {
  Rng rng(seed);
  Qubo q = empty_qubo_12();
  q.offset = rng.normal();
  for (uint32_t v = 0; v < q.reg.size(); ++v)
    if (rng.uniform() < density) q.linear[v] = 2.0 * rng.normal();
  for (uint32_t u = 0; u < q.reg.size(); ++u)
    for (uint32_t v = u + 1; v < q.reg.size(); ++v)
      if (rng.uniform() < density) q.quadratic[{u, v}] = 2.0 * rng.normal();
  return q;
}

Dataset random_dataset(int n, int rows, uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  for (int i = 0; i < n; ++i)
    ds.variables.push_back({"v" + std::to_string(i), 2});
  for (int t = 0; t < rows; ++t) {
    std::vector<uint8_t> row;
    for (int i = 0; i < n; ++i)
      row.push_back(static_cast<uint8_t>(rng.below(2)));
    ds.rows.push_back(row);
  }
  return ds;
}

bool same_samples(const SampleSet& a, const SampleSet& b) {
  if (a.reads.size() != b.reads.size()) return false;
  for (size_t k = 0; k < a.reads.size(); ++k) {
    if (a.reads[k].x != b.reads[k].x) return false;
    if (a.reads[k].energy != b.reads[k].energy) return false;
    if (a.reads[k].occurrences != b.reads[k].occurrences) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("energy basics") {
  Qubo q = empty_qubo_12();
  q.offset = 2.5;
  Bits zero(q.reg.size(), 0);
  CHECK(energy(q, zero) == 2.5);

  q.linear[3] = -1.25;
  Bits one(zero);
  one[3] = 1;
  CHECK(energy(q, one) == 2.5 - 1.25);

  CHECK_THROWS_AS(energy(q, Bits(5, 0)), std::invalid_argument);
}

TEST_CASE("energy matches an independent per-term evaluator") {
  Qubo q = random_qubo_12(77);
  Rng rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    Bits x(q.reg.size());
    for (auto& b : x) b = static_cast<uint8_t>(rng.below(2));
    double want = q.offset;
    for (uint32_t v = 0; v < q.reg.size(); ++v) want += q.linear[v] * x[v];
    for (const auto& [pair, c] : q.quadratic)
      want += c * x[pair.first] * x[pair.second];
    CHECK(energy(q, x) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive solver on hand-checkable problems") {
  Qubo q = empty_qubo_12();
  q.linear[0] = 1.0;
  SampleSet all = solve_exhaustive(q);
  CHECK(all.reads.size() == 4096);
  CHECK(all.reads.front().x[0] == 0);  // positive linear -> ground at 0
  CHECK(all.reads.front().energy == 0.0);

  Qubo q2 = empty_qubo_12();
  q2.quadratic[{0, 1}] = -1.0;
  SampleSet s2 = solve_exhaustive(q2, 4);
  CHECK(s2.reads.front().energy == -1.0);
  CHECK(s2.reads.front().x[0] == 1);
  CHECK(s2.reads.front().x[1] == 1);
}

TEST_CASE("exhaustive solver refuses oversized problems") {
  Qubo big{VarRegistry(6, 3), {}, {}, 0.0};  // 30 + 15 + 12 = 57 variables
  big.linear.assign(big.reg.size(), 0.0);
  CHECK_THROWS_AS(solve_exhaustive(big), std::invalid_argument);
}

TEST_CASE("sample sets are sorted with energies matching recomputation") {
  Qubo q = random_qubo_12(80);
  SampleSet s = solve_exhaustive(q);
  for (size_t k = 1; k < s.reads.size(); ++k)
    CHECK(s.reads[k - 1].energy <= s.reads[k].energy);
  for (size_t k = 0; k < s.reads.size(); k += 257)
    CHECK(s.reads[k].energy ==
          doctest::Approx(energy(q, s.reads[k].x)).epsilon(1e-9));
}

TEST_CASE("every SA read solves a separable problem exactly") {
  Rng rng(81);
  Qubo q = empty_qubo_12();
  double ground = 0.0;
  for (uint32_t v = 0; v < q.reg.size(); ++v) {
    q.linear[v] = rng.normal();
    if (q.linear[v] < 0) ground += q.linear[v];
  }
  Schedule sched = auto_schedule(q, 50);
  SampleSet s = solve_sa(q, sched, 100, 4242);
  int total = 0;
  for (const auto& r : s.reads) {
    CHECK(r.energy == doctest::Approx(ground).epsilon(1e-12));
    total += r.occurrences;
  }
  CHECK(total == 100);
}

TEST_CASE("single linear term is optimized by every read") {
  Qubo q = empty_qubo_12();
  q.linear[7] = -3.0;
  SampleSet s = solve_sa(q, Schedule{5, 0.1, 1.0}, 100, 9);
  int total = 0;
  for (const auto& r : s.reads) {
    CHECK(r.x[7] == 1);  // the only constrained bit
    CHECK(r.energy == -3.0);
    total += r.occurrences;
  }
  CHECK(total == 100);
}

TEST_CASE("SA reaches the exhaustive ground state of an assembled problem") {
  Dataset ds = random_dataset(4, 60, 82);
  LocalScoreTable table = score_table(ds, 2, PriorScheme::k2());
  Qubo q = assemble(table, 2);
  REQUIRE(q.reg.size() == 26);
  double ground = solve_exhaustive(q, 8).reads.front().energy;
  SampleSet s = solve_sa(q, auto_schedule(q, 2000), 300, 31337, 2);
  CHECK(s.reads.front().energy == doctest::Approx(ground).epsilon(1e-9));
}

TEST_CASE("solve_sa is deterministic and thread-count independent") {
  Qubo q = random_qubo_12(83);
  Schedule sched = auto_schedule(q, 200);
  SampleSet a = solve_sa(q, sched, 60, 5, 1);
  SampleSet b = solve_sa(q, sched, 60, 5, 4);
  SampleSet c = solve_sa(q, sched, 60, 5, 3);
  CHECK(same_samples(a, b));
  CHECK(same_samples(a, c));
}

TEST_CASE("auto_schedule endpoints") {
  Qubo q = empty_qubo_12();
  q.linear[0] = 1.0;
  Schedule s = auto_schedule(q, 10);
  CHECK(s.beta_hot == doctest::Approx(std::log(2.0)));
  CHECK(s.beta_cold == doctest::Approx(std::log(100.0)));

  Qubo q10 = q;
  for (auto& v : q10.linear) v *= 10.0;
  Schedule s10 = auto_schedule(q10, 10);
  CHECK(s10.beta_hot == doctest::Approx(s.beta_hot / 10.0));
  CHECK(s10.beta_cold == doctest::Approx(s.beta_cold / 10.0));

  Qubo zero = empty_qubo_12();
  CHECK_THROWS_AS(auto_schedule(zero, 10), std::invalid_argument);
}

TEST_CASE("auto_schedule on an assembled problem is finite and ordered") {
  Dataset ds = random_dataset(8, 100, 84);
  LocalScoreTable table = score_table(ds, 3, PriorScheme::k2());
  Qubo q = assemble(table, 3);
  Schedule s = auto_schedule(q, 100);
  CHECK(s.beta_hot > 0.0);
  CHECK(std::isfinite(s.beta_hot));
  CHECK(std::isfinite(s.beta_cold));
  CHECK(s.beta_cold > s.beta_hot);
}

TEST_CASE("schedule_family spaces sweeps geometrically") {
  Qubo q = random_qubo_12(85);
  auto family = schedule_family(q, 30, 100, 10000);
  CHECK(family.size() == 30);
  CHECK(family.front().sweeps == 100);
  CHECK(family.back().sweeps == 10000);
  for (size_t k = 1; k < family.size(); ++k)
    CHECK(family[k].sweeps >= family[k - 1].sweeps);
}

TEST_CASE("identity gauge leaves the problem unchanged") {
  Qubo q = random_qubo_12(86);
  Qubo g = apply_gauge(q, identity_gauge(q.reg.size()));
  CHECK(g.offset == q.offset);
  CHECK(g.linear == q.linear);
  CHECK(g.quadratic == q.quadratic);
}

TEST_CASE("all-flip gauge applied twice restores the problem") {
  Qubo q = random_qubo_12(87);
  Gauge flip{std::vector<int8_t>(q.reg.size(), -1)};
  Qubo twice = apply_gauge(apply_gauge(q, flip), flip);
  CHECK(twice.offset == doctest::Approx(q.offset).epsilon(1e-12));
  for (uint32_t v = 0; v < q.reg.size(); ++v)
    CHECK(twice.linear[v] == doctest::Approx(q.linear[v]).epsilon(1e-12));
  for (const auto& [pair, c] : q.quadratic)
    CHECK(twice.quadratic.at(pair) == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("gauged energies match pointwise and ungauge is an involution") {
  Qubo q = random_qubo_12(88);
  Rng rng(89);
  Gauge g = random_gauge(q.reg.size(), rng);
  Qubo gq = apply_gauge(q, g);
  for (int trial = 0; trial < 50; ++trial) {
    Bits x(q.reg.size());
    for (auto& b : x) b = static_cast<uint8_t>(rng.below(2));
    Bits mapped = ungauge(x, g);  // the map is its own inverse
    CHECK(ungauge(mapped, g) == x);
    CHECK(energy(q, x) == doctest::Approx(energy(gq, mapped)).epsilon(1e-9));
  }
}

TEST_CASE("the exhaustive spectrum is gauge invariant") {
  Qubo q = random_qubo_12(90);
  std::vector<double> base;
  for (const auto& r : solve_exhaustive(q).reads) base.push_back(r.energy);
  Rng rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    Gauge g = random_gauge(q.reg.size(), rng);
    std::vector<double> spec;
    for (const auto& r : solve_exhaustive(apply_gauge(q, g)).reads)
      spec.push_back(r.energy);
    REQUIRE(spec.size() == base.size());
    for (size_t k = 0; k < base.size(); ++k)
      CHECK(spec[k] == doctest::Approx(base[k]).epsilon(1e-9));
  }
}

TEST_CASE("a one-schedule one-gauge campaign reduces to solve_sa") {
  Qubo q = random_qubo_12(92);
  Schedule sched = auto_schedule(q, 150);
  SampleSet direct = solve_sa(q, sched, 25, 777);
  CampaignResult camp = run_campaign(q, {sched}, 25, 1, 777);
  REQUIRE(camp.per_schedule.size() == 1);
  CHECK(same_samples(camp.per_schedule[0], direct));
  CHECK(camp.records.size() == 25);
}

TEST_CASE("campaigns are reproducible and split reads across gauges") {
  Qubo q = random_qubo_12(93);
  auto scheds = schedule_family(q, 2, 50, 200);
  CampaignResult a = run_campaign(q, scheds, 10, 3, 1234);
  CampaignResult b = run_campaign(q, scheds, 10, 3, 1234);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].schedule_id == b.records[k].schedule_id);
    CHECK(a.records[k].gauge_id == b.records[k].gauge_id);
    CHECK(a.records[k].energy == b.records[k].energy);
    CHECK(a.records[k].x == b.records[k].x);
  }
  // 10 reads over 3 gauges -> 4 + 3 + 3
  int per_gauge[3] = {0, 0, 0};
  for (const auto& rec : a.records)
    if (rec.schedule_id == 0) ++per_gauge[rec.gauge_id];
  CHECK(per_gauge[0] == 4);
  CHECK(per_gauge[1] == 3);
  CHECK(per_gauge[2] == 3);

  // every record energy is consistent with the original problem
  for (const auto& rec : a.records)
    CHECK(rec.energy == doctest::Approx(energy(q, rec.x)).epsilon(1e-9));

  CHECK_THROWS_AS(run_campaign(q, scheds, 2, 3, 1), std::invalid_argument);
}

TEST_CASE("read records serialize one line per read") {
  Qubo q = random_qubo_12(94);
  auto scheds = schedule_family(q, 2, 20, 40);
  CampaignResult camp = run_campaign(q, scheds, 6, 2, 55);
  std::ostringstream out;
  save_reads(out, camp);
  size_t lines = 0;
  std::istringstream in(out.str());
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++lines;
  CHECK(lines == 12);
  CHECK(pack_hex(Bits{1, 0, 0, 0, 1, 1}) == "13");
}
