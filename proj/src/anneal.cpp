#include "bnq/anneal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "bnq/textfmt.hpp"

namespace bnq {

double energy(const Qubo& q, const Bits& x) {
  if (x.size() != q.reg.size())
    throw std::invalid_argument("energy: assignment length mismatch");
  double e = q.offset;
  for (uint32_t v = 0; v < q.linear.size(); ++v)
    if (x[v]) e += q.linear[v];
  for (const auto& [pair, c] : q.quadratic)
    if (x[pair.first] && x[pair.second]) e += c;
  return e;
}

namespace {

// flat adjacency for the inner loops
struct Adjacency {
  uint32_t n = 0;
  std::vector<double> linear;
  std::vector<uint32_t> start;  // CSR offsets, size n+1
  std::vector<uint32_t> nbr;
  std::vector<double> coeff;

  explicit Adjacency(const Qubo& q) {
    n = q.reg.size();
    linear = q.linear;
    std::vector<uint32_t> deg(n, 0);
    for (const auto& [pair, c] : q.quadratic) {
      (void)c;
      ++deg[pair.first];
      ++deg[pair.second];
    }
    start.assign(n + 1, 0);
    for (uint32_t v = 0; v < n; ++v) start[v + 1] = start[v] + deg[v];
    nbr.resize(start[n]);
    coeff.resize(start[n]);
    std::vector<uint32_t> fill(start.begin(), start.end() - 1);
    for (const auto& [pair, c] : q.quadratic) {
      auto [u, v] = pair;
      nbr[fill[u]] = v;
      coeff[fill[u]++] = c;
      nbr[fill[v]] = u;
      coeff[fill[v]++] = c;
    }
  }

  // local field: dE for flipping v from 0 to 1 at assignment x
  void init_fields(const Bits& x, std::vector<double>& phi) const {
    phi = linear;
    for (uint32_t v = 0; v < n; ++v) {
      if (!x[v]) continue;
      for (uint32_t k = start[v]; k < start[v + 1]; ++k) phi[nbr[k]] += coeff[k];
    }
  }
};

bool read_less(const Read& a, const Read& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.x < b.x;
}

SampleSet merge_reads(std::vector<Read> raw) {
  std::sort(raw.begin(), raw.end(), read_less);
  SampleSet out;
  for (auto& r : raw) {
    if (!out.reads.empty() && out.reads.back().x == r.x)
      out.reads.back().occurrences += r.occurrences;
    else
      out.reads.push_back(std::move(r));
  }
  return out;
}

// For an arc bit, the variables that must track it for the constraint
// blocks to stay zero: the owning node's slack bits and any reduction
// ancillas over pairs containing the arc. Flipping an arc alone always
// crosses a penalty-height barrier; proposing the repaired bundle lets arcs
// move at score-scale temperatures.
struct RepairPlan {
  int child = -1;
  std::vector<uint32_t> ybits;                         // ascending bit order
  std::vector<std::pair<uint32_t, uint32_t>> ancs;     // (ancilla, partner)
};

std::vector<RepairPlan> make_repair_plans(const VarRegistry& reg) {
  std::vector<RepairPlan> plans(reg.size());
  uint32_t n_arcs = static_cast<uint32_t>(reg.n() * (reg.n() - 1));
  for (uint32_t v = 0; v < n_arcs; ++v) {
    auto role = reg.role(v);
    plans[v].child = role.j;
    for (int l = 0; l < reg.mu(); ++l)
      plans[v].ybits.push_back(reg.y(role.j, l));
  }
  uint32_t base = reg.base_size();
  for (uint32_t k = 0; k < reg.ancillas().size(); ++k) {
    auto [a, b] = reg.ancillas()[k];
    if (a < n_arcs) plans[a].ancs.push_back({base + k, b});
    if (b < n_arcs) plans[b].ancs.push_back({base + k, a});
  }
  return plans;
}

// Metropolis + quench state for one read
struct SaState {
  const Adjacency& adj;
  const std::vector<RepairPlan>& plans;
  int m;
  Bits x;
  std::vector<double> phi;
  std::vector<int> indeg;
  std::vector<uint32_t> flipped;  // scratch for proposals

  SaState(const Adjacency& adj_in, const std::vector<RepairPlan>& plans_in,
          const VarRegistry& reg, Bits start)
      : adj(adj_in), plans(plans_in), m(reg.m()), x(std::move(start)) {
    adj.init_fields(x, phi);
    indeg.assign(reg.n(), 0);
    uint32_t n_arcs = static_cast<uint32_t>(reg.n() * (reg.n() - 1));
    for (uint32_t v = 0; v < n_arcs; ++v)
      if (x[v]) ++indeg[plans[v].child];
  }

  double flip(uint32_t v) {
    double dE = x[v] ? -phi[v] : phi[v];
    double sign = x[v] ? -1.0 : 1.0;
    x[v] ^= 1;
    for (uint32_t k = adj.start[v]; k < adj.start[v + 1]; ++k)
      phi[adj.nbr[k]] += sign * adj.coeff[k];
    if (plans[v].child >= 0) indeg[plans[v].child] += x[v] ? 1 : -1;
    return dE;
  }

  // arc flip bundled with slack and ancilla repair; returns total dE
  double propose_repaired(uint32_t v) {
    flipped.clear();
    double dE = flip(v);
    flipped.push_back(v);
    const RepairPlan& plan = plans[v];
    int target = m - indeg[plan.child];
    if (target < 0) target = 0;
    for (size_t l = 0; l < plan.ybits.size(); ++l) {
      uint32_t yv = plan.ybits[l];
      uint8_t want = static_cast<uint8_t>((target >> l) & 1);
      if (x[yv] != want) {
        dE += flip(yv);
        flipped.push_back(yv);
      }
    }
    for (auto [z, partner] : plan.ancs) {
      uint8_t want = x[v] & x[partner];
      if (x[z] != want) {
        dE += flip(z);
        flipped.push_back(z);
      }
    }
    return dE;
  }

  void rollback() {
    for (size_t k = flipped.size(); k-- > 0;) flip(flipped[k]);
  }

  bool is_arc(uint32_t v) const { return plans[v].child >= 0; }
};

Read sa_single_read(const Qubo& q, const Adjacency& adj,
                    const std::vector<RepairPlan>& plans,
                    const Schedule& sched, uint64_t read_seed) {
  Rng rng(read_seed);
  uint32_t n = adj.n;
  Bits start(n, 0);
  for (uint32_t v = 0; v < n; ++v)
    start[v] = static_cast<uint8_t>(rng.below(2));
  SaState st(adj, plans, q.reg, std::move(start));

  auto metropolis = [&](double dE, double beta) {
    if (dE <= 0.0) return true;
    if (beta * dE > 44.0) return false;  // exp underflows well below 2^-53
    return rng.uniform() < std::exp(-beta * dE);
  };

  double beta = sched.beta_hot;
  double ratio = sched.sweeps > 1
                     ? std::pow(sched.beta_cold / sched.beta_hot,
                                1.0 / (sched.sweeps - 1))
                     : 1.0;
  for (int t = 0; t < sched.sweeps; ++t) {
    for (uint32_t v = 0; v < n; ++v) {
      if (st.is_arc(v)) {
        double dE = st.propose_repaired(v);
        bool bundled = st.flipped.size() > 1;
        if (metropolis(dE, beta)) continue;
        st.rollback();
        if (!bundled) continue;  // bare flip already covered
      }
      double dE = st.x[v] ? -st.phi[v] : st.phi[v];
      if (metropolis(dE, beta)) st.flip(v);
    }
    beta *= ratio;
  }

  // greedy quench: strict descent to a local minimum, so barrier-free
  // problems always end at their optimum
  bool improved = true;
  while (improved) {
    improved = false;
    for (uint32_t v = 0; v < n; ++v) {
      if (st.is_arc(v)) {
        double dE = st.propose_repaired(v);
        if (dE < 0.0) {
          improved = true;
          continue;
        }
        st.rollback();
      }
      double dE = st.x[v] ? -st.phi[v] : st.phi[v];
      if (dE < 0.0) {
        st.flip(v);
        improved = true;
      }
    }
  }

  Read r;
  r.energy = energy(q, st.x);
  r.x = std::move(st.x);
  return r;
}

std::vector<Read> solve_sa_raw(const Qubo& q, const Schedule& sched, int reads,
                               uint64_t seed, int threads) {
  if (reads < 1) throw std::invalid_argument("solve_sa: reads must be >= 1");
  if (sched.sweeps < 1 || sched.beta_hot <= 0.0 ||
      sched.beta_cold <= sched.beta_hot)
    throw std::invalid_argument("solve_sa: malformed schedule");
  Adjacency adj(q);
  std::vector<RepairPlan> plans = make_repair_plans(q.reg);
  std::vector<Read> raw(reads);
  auto work = [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k)
      raw[k] = sa_single_read(q, adj, plans, sched, derive_seed(seed, k));
  };
  if (threads <= 1 || reads == 1) {
    work(0, reads);
  } else {
    int t = std::min(threads, reads);
    std::vector<std::thread> pool;
    for (int i = 0; i < t; ++i) {
      int lo = static_cast<int>(static_cast<long long>(reads) * i / t);
      int hi = static_cast<int>(static_cast<long long>(reads) * (i + 1) / t);
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return raw;
}

}  // namespace

SampleSet solve_sa(const Qubo& q, const Schedule& sched, int reads,
                   uint64_t seed, int threads) {
  return merge_reads(solve_sa_raw(q, sched, reads, seed, threads));
}

SampleSet solve_exhaustive(const Qubo& q, size_t keep) {
  uint32_t n = q.reg.size();
  if (n > 26)
    throw std::invalid_argument("solve_exhaustive: " + std::to_string(n) +
                                " variables exceed the 26-variable cap");
  if (keep == 0 && n > 20)
    throw std::invalid_argument(
        "solve_exhaustive: full sample set above 20 variables; pass keep");

  Adjacency adj(q);
  Bits x(n, 0);
  std::vector<double> phi;
  adj.init_fields(x, phi);
  double e = q.offset;

  std::vector<std::pair<double, uint32_t>> found;  // (incremental energy, packed)
  found.reserve(keep ? 0 : (size_t{1} << n));
  auto consider = [&](double en, uint32_t packed) {
    found.push_back({en, packed});
    if (keep && found.size() >= 2 * keep + 64) {
      std::nth_element(found.begin(), found.begin() + keep, found.end());
      found.resize(keep);
    }
  };

  uint32_t packed = 0;
  consider(e, packed);
  uint64_t total = uint64_t{1} << n;
  for (uint64_t k = 1; k < total; ++k) {
    uint32_t v = static_cast<uint32_t>(std::countr_zero(k));
    double dE = x[v] ? -phi[v] : phi[v];
    double sign = x[v] ? -1.0 : 1.0;
    x[v] ^= 1;
    packed ^= (1u << v);
    e += dE;
    for (uint32_t j = adj.start[v]; j < adj.start[v + 1]; ++j)
      phi[adj.nbr[j]] += sign * adj.coeff[j];
    consider(e, packed);
  }

  auto unpack = [n](uint32_t bits) {
    Bits out(n);
    for (uint32_t v = 0; v < n; ++v) out[v] = (bits >> v) & 1u;
    return out;
  };

  std::vector<Read> raw;
  raw.reserve(found.size());
  for (auto& [en, p] : found) {
    (void)en;
    Read r;
    r.x = unpack(p);
    r.energy = energy(q, r.x);  // exact, replaces the drifting running sum
    raw.push_back(std::move(r));
  }
  SampleSet out = merge_reads(std::move(raw));
  if (keep && out.reads.size() > keep) out.reads.resize(keep);
  return out;
}

Schedule auto_schedule(const Qubo& q, int sweeps) {
  uint32_t n = q.reg.size();
  std::vector<double> bound(n, 0.0);
  double min_mag = 1e300;
  bool any = false;
  for (uint32_t v = 0; v < n; ++v) {
    if (q.linear[v] != 0.0) {
      bound[v] += std::fabs(q.linear[v]);
      min_mag = std::min(min_mag, std::fabs(q.linear[v]));
      any = true;
    }
  }
  for (const auto& [pair, c] : q.quadratic) {
    if (c == 0.0) continue;
    bound[pair.first] += std::fabs(c);
    bound[pair.second] += std::fabs(c);
    min_mag = std::min(min_mag, std::fabs(c));
    any = true;
  }
  if (!any) throw std::invalid_argument("auto_schedule: nothing to optimize");
  double max_bound = *std::max_element(bound.begin(), bound.end());

  Schedule s;
  s.sweeps = sweeps;
  s.beta_hot = std::log(2.0) / max_bound;
  s.beta_cold = std::log(100.0) / min_mag;
  return s;
}

std::vector<Schedule> schedule_family(const Qubo& q, int count, int sweeps_min,
                                      int sweeps_max) {
  if (count < 1 || sweeps_min < 1 || sweeps_max < sweeps_min)
    throw std::invalid_argument("schedule_family: bad parameters");
  Schedule base = auto_schedule(q, sweeps_min);
  std::vector<Schedule> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    double t = count > 1 ? static_cast<double>(k) / (count - 1) : 0.0;
    double sweeps =
        sweeps_min * std::pow(static_cast<double>(sweeps_max) / sweeps_min, t);
    Schedule s = base;
    s.sweeps = static_cast<int>(std::lround(sweeps));
    out.push_back(s);
  }
  return out;
}

Gauge identity_gauge(uint32_t n) { return {std::vector<int8_t>(n, 1)}; }

Gauge random_gauge(uint32_t n, Rng& rng) {
  Gauge g;
  g.flips.resize(n);
  for (uint32_t v = 0; v < n; ++v)
    g.flips[v] = rng.below(2) ? static_cast<int8_t>(-1) : static_cast<int8_t>(1);
  return g;
}

Qubo apply_gauge(const Qubo& q, const Gauge& g) {
  if (g.flips.size() != q.reg.size())
    throw std::invalid_argument("apply_gauge: gauge length mismatch");
  // In QUBO space a spin-reversed variable is complemented: substitute
  // x_v -> 1 - x_v wherever g_v = -1.
  Qubo out{q.reg, std::vector<double>(q.reg.size(), 0.0), {}, q.offset};
  for (uint32_t v = 0; v < q.reg.size(); ++v) {
    if (g.flips[v] == 1) {
      out.linear[v] += q.linear[v];
    } else {
      out.offset += q.linear[v];
      out.linear[v] -= q.linear[v];
    }
  }
  for (const auto& [pair, c] : q.quadratic) {
    auto [u, v] = pair;
    bool fu = g.flips[u] == -1, fv = g.flips[v] == -1;
    if (!fu && !fv) {
      out.quadratic[pair] += c;
    } else if (fu && fv) {
      out.offset += c;
      out.linear[u] -= c;
      out.linear[v] -= c;
      out.quadratic[pair] += c;
    } else if (fu) {
      out.linear[v] += c;
      out.quadratic[pair] -= c;
    } else {
      out.linear[u] += c;
      out.quadratic[pair] -= c;
    }
  }
  return out;
}

Bits ungauge(const Bits& x, const Gauge& g) {
  if (g.flips.size() != x.size())
    throw std::invalid_argument("ungauge: gauge length mismatch");
  Bits out(x);
  for (size_t v = 0; v < x.size(); ++v)
    if (g.flips[v] == -1) out[v] ^= 1;
  return out;
}

CampaignResult run_campaign(const Qubo& q, const std::vector<Schedule>& scheds,
                            int reads_per, int gauges_per, uint64_t seed,
                            int threads) {
  if (scheds.empty())
    throw std::invalid_argument("run_campaign: no schedules");
  if (gauges_per < 1)
    throw std::invalid_argument("run_campaign: need at least one gauge");
  if (reads_per < gauges_per)
    throw std::invalid_argument("run_campaign: reads_per below gauges_per");

  constexpr uint64_t kSchedStride = 0x9E3779B97F4A7C15ULL;
  constexpr uint64_t kGaugeStride = 0xBF58476D1CE4E5B9ULL;

  CampaignResult result;
  result.schedules = scheds;
  for (size_t s = 0; s < scheds.size(); ++s) {
    std::vector<Read> merged_raw;
    int base = reads_per / gauges_per;
    int extra = reads_per % gauges_per;
    for (int g = 0; g < gauges_per; ++g) {
      int nreads = base + (g < extra ? 1 : 0);
      Gauge gauge;
      if (g == 0) {
        gauge = identity_gauge(q.reg.size());
      } else {
        Rng grng(mix64(seed ^ (kSchedStride * (s + 1) + kGaugeStride * g)));
        gauge = random_gauge(q.reg.size(), grng);
      }
      Qubo gauged = apply_gauge(q, gauge);
      uint64_t run_seed = seed + kSchedStride * static_cast<uint64_t>(s) +
                          kGaugeStride * static_cast<uint64_t>(g);
      std::vector<Read> raw =
          solve_sa_raw(gauged, scheds[s], nreads, run_seed, threads);
      for (auto& r : raw) {
        Read back;
        back.x = ungauge(r.x, gauge);
        back.energy = energy(q, back.x);
        result.records.push_back(
            {static_cast<int>(s), g, back.energy, back.x});
        merged_raw.push_back(std::move(back));
      }
    }
    result.per_schedule.push_back(merge_reads(std::move(merged_raw)));
  }
  return result;
}

std::string pack_hex(const Bits& x) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve((x.size() + 3) / 4);
  for (size_t base = 0; base < x.size(); base += 4) {
    int nibble = 0;
    for (size_t b = 0; b < 4 && base + b < x.size(); ++b)
      nibble |= x[base + b] << b;
    out.push_back(digits[nibble]);
  }
  return out;
}

void save_reads(std::ostream& out, const CampaignResult& result) {
  out << "# schedule gauge energy assignment_hex_lsb_first\n";
  for (const auto& rec : result.records)
    out << rec.schedule_id << " " << rec.gauge_id << " " << fmt17(rec.energy)
        << " " << pack_hex(rec.x) << "\n";
}

}  // namespace bnq
