#pragma once
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bnq/qubo.hpp"
#include "bnq/rng.hpp"

namespace bnq {

// Geometric inverse-temperature ramp over `sweeps` full Metropolis passes.
struct Schedule {
  int sweeps = 1;
  double beta_hot = 0.0;
  double beta_cold = 0.0;
};

struct Read {
  Bits x;
  double energy = 0.0;
  int occurrences = 1;
};

// Solver reads sorted ascending by (energy, assignment).
struct SampleSet {
  std::vector<Read> reads;
};

// Spin-reversal transform: per-variable sign in Ising space; in QUBO space a
// flipped variable is complemented. Applying a gauge twice is the identity.
struct Gauge {
  std::vector<int8_t> flips;  // +1 or -1
};

double energy(const Qubo& q, const Bits& x);

// All 2^N assignments via a Gray-code walk. keep = 0 returns the full
// ordered set (N <= 20); otherwise the best `keep` assignments. N <= 26.
SampleSet solve_exhaustive(const Qubo& q, size_t keep = 0);

// `reads` independent restarts from uniform random assignments, single-bit
// Metropolis sweeps, geometric beta ramp. Read k draws from an RNG stream
// derived from (seed, k), so results are independent of the thread count.
SampleSet solve_sa(const Qubo& q, const Schedule& sched, int reads,
                   uint64_t seed, int threads = 1);

// beta_hot = ln 2 / dE_max, beta_cold = ln 100 / dE_min, with dE_max the
// largest per-variable coefficient-sum bound on a single-flip energy change
// and dE_min the smallest nonzero coefficient magnitude.
Schedule auto_schedule(const Qubo& q, int sweeps);

// `count` schedules with sweeps log-spaced between sweeps_min and
// sweeps_max, betas from auto_schedule.
std::vector<Schedule> schedule_family(const Qubo& q, int count,
                                      int sweeps_min, int sweeps_max);

Gauge identity_gauge(uint32_t n);
Gauge random_gauge(uint32_t n, Rng& rng);
Qubo apply_gauge(const Qubo& q, const Gauge& g);
Bits ungauge(const Bits& x, const Gauge& g);

struct ReadRecord {
  int schedule_id = 0;
  int gauge_id = 0;
  double energy = 0.0;
  Bits x;
};

struct CampaignResult {
  std::vector<Schedule> schedules;
  std::vector<SampleSet> per_schedule;  // ungauged, merged
  std::vector<ReadRecord> records;      // one per read, ungauged
};

// Per schedule, reads_per reads split across gauges_per gauges (gauge 0 is
// the identity, the rest are random); every read is ungauged and its energy
// recomputed under the original problem.
CampaignResult run_campaign(const Qubo& q, const std::vector<Schedule>& scheds,
                            int reads_per, int gauges_per, uint64_t seed,
                            int threads = 1);

// One line per read: schedule id, gauge id, energy, hex-packed assignment.
void save_reads(std::ostream& out, const CampaignResult& result);

std::string pack_hex(const Bits& x);

}  // namespace bnq
