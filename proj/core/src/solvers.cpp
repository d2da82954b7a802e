#include "latdesign/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "latdesign/errors.hpp"
#include "latdesign/parallel.hpp"

namespace latdesign {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool candidate_less(const Candidate& a, const Candidate& b) {
  return a.value < b.value || (a.value == b.value && a.sequence < b.sequence);
}

// Bounded ascending pool of distinct sequences.
class ElitePool {
 public:
  explicit ElitePool(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

  void offer(std::span<const std::uint8_t> types, double value) {
    if (pool_.size() == capacity_ && value >= pool_.back().value) return;
    for (const auto& c : pool_) {
      if (std::equal(types.begin(), types.end(), c.sequence.types().begin())) return;
    }
    Candidate c{Sequence(std::vector<std::uint8_t>(types.begin(), types.end())), value};
    pool_.insert(std::upper_bound(pool_.begin(), pool_.end(), c, candidate_less), std::move(c));
    if (pool_.size() > capacity_) pool_.pop_back();
  }

  std::vector<Candidate> take() { return std::move(pool_); }

 private:
  std::size_t capacity_;
  std::vector<Candidate> pool_;
};

bool metropolis(double delta, double temperature, std::mt19937_64& rng) {
  if (delta <= 0.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < std::exp(-delta / temperature);
}

}  // namespace

void AnnealSchedule::validate() const {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw InvalidArgument("annealing needs t_max > t_min > 0");
  if (n_steps == 0) throw InvalidArgument("annealing needs at least one step");
}

double AnnealSchedule::temperature(std::uint64_t step) const {
  const double frac = static_cast<double>(step) / static_cast<double>(n_steps);
  return t_max * std::pow(t_min / t_max, frac);
}

Sequence random_sequence(const Composition& comp, std::uint64_t seed) {
  Sequence s = first_sequence(comp);
  std::mt19937_64 rng(seed);
  std::shuffle(s.mutable_types().begin(), s.mutable_types().end(), rng);
  return s;
}

SolverRun sequence_sa(const ScoringFunction& g, const Sequence& init, const AnnealSchedule& sched,
                      const RunOptions& opts) {
  sched.validate();
  if (init.size() != g.length()) throw InvalidArgument("initial sequence length does not match G");
  const auto start = Clock::now();
  SolverRun run;
  run.seed = sched.seed;

  std::vector<std::uint8_t> types(init.types().begin(), init.types().end());
  double value = g(types);
  ElitePool elite(opts.elite_size);
  elite.offer(types, value);
  if (opts.record_trace) run.trace.push_back(value);

  const bool movable = std::adjacent_find(types.begin(), types.end(), std::not_equal_to<>()) != types.end();
  if (movable) {
    std::mt19937_64 rng(sched.seed);
    std::uniform_int_distribution<std::size_t> pick(0, types.size() - 1);
    std::uniform_int_distribution<std::size_t> other(0, types.size() - 2);
    for (std::uint64_t k = 0; k < sched.n_steps; ++k) {
      const double temperature = sched.temperature(k);
      const std::size_t i = pick(rng);
      std::size_t j = other(rng);
      if (j >= i) ++j;
      if (types[i] == types[j]) continue;
      const double delta = g.swap_delta(types, i, j);
      if (!metropolis(delta, temperature, rng)) continue;
      std::swap(types[i], types[j]);
      value += delta;
      elite.offer(types, value);
      if (opts.record_trace) run.trace.push_back(value);
    }
  }

  run.elite = elite.take();
  // Accumulated deltas drift; report the exact value of each kept sequence.
  for (auto& c : run.elite) c.value = g(c.sequence);
  std::sort(run.elite.begin(), run.elite.end(), candidate_less);
  run.best = run.elite.front().sequence;
  run.best_value = run.elite.front().value;
  run.wall_seconds = seconds_since(start);
  return run;
}

namespace {

// Sparse symmetric view of a QUBO for local-field updates.
struct QuboGraph {
  std::vector<double> linear;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> neighbors;
  std::vector<double> weights;

  explicit QuboGraph(const QuboProblem& p) : linear(p.num_vars(), 0.0), offsets(p.num_vars() + 1, 0) {
    for (const auto& t : p.terms()) {
      if (t.u == t.v) {
        linear[t.u] += t.coeff;
      } else {
        ++offsets[t.u + 1];
        ++offsets[t.v + 1];
      }
    }
    for (std::size_t u = 0; u < p.num_vars(); ++u) offsets[u + 1] += offsets[u];
    neighbors.resize(offsets.back());
    weights.resize(offsets.back());
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (const auto& t : p.terms()) {
      if (t.u == t.v) continue;
      neighbors[fill[t.u]] = t.v;
      weights[fill[t.u]++] = t.coeff;
      neighbors[fill[t.v]] = t.u;
      weights[fill[t.v]++] = t.coeff;
    }
  }
};

struct QuboRestart {
  SolverRun run;
  Assignment best_assignment;
  double best_energy = std::numeric_limits<double>::infinity();
  bool best_valid = false;
  double max_drift = 0.0;
};

QuboRestart qubo_restart(const QuboProblem& p, const QuboGraph& graph, const Composition& comp,
                         const AnnealSchedule& sched, const QuboSaOptions& opts) {
  const auto start = Clock::now();
  const int d = comp.alphabet_size();
  const auto k = static_cast<std::size_t>(d - 1);
  const std::size_t n = p.num_vars();
  const std::size_t sites = n / k;
  std::mt19937_64 rng(sched.seed);

  Assignment x(n, 0);
  if (opts.init == QuboInit::random_valid) {
    x = encode_assignment(random_sequence(comp, rng()), d);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (auto& bit : x) bit = coin(rng) ? 1 : 0;
  }

  // Validity bookkeeping: hot bits per site and per type, and a violation
  // count that is zero exactly for decodable assignments.
  std::vector<int> site_hot(sites, 0);
  std::vector<int> type_count(static_cast<std::size_t>(d), 0);
  for (std::size_t u = 0; u < n; ++u) {
    if (!x[u]) continue;
    ++site_hot[u / k];
    ++type_count[u % k + 1];
  }
  long violations = 0;
  for (int h : site_hot) violations += std::max(0, h - 1);
  for (int m = 1; m < d; ++m) violations += std::abs(type_count[m] - comp.counts[m]);

  std::vector<double> field(graph.linear);
  for (std::size_t u = 0; u < n; ++u) {
    if (!x[u]) continue;
    for (std::size_t q = graph.offsets[u]; q < graph.offsets[u + 1]; ++q) field[graph.neighbors[q]] += graph.weights[q];
  }
  double energy = qubo_energy(p, x);

  QuboRestart out;
  out.run.seed = sched.seed;
  ElitePool elite(opts.elite_size);
  auto decode_types = [&](std::vector<std::uint8_t>& types) {
    types.assign(sites, 0);
    for (std::size_t u = 0; u < n; ++u) {
      if (x[u]) types[u / k] = static_cast<std::uint8_t>(u % k + 1);
    }
  };
  std::vector<std::uint8_t> types;
  auto consider = [&] {
    const bool valid = violations == 0;
    if (valid) {
      decode_types(types);
      elite.offer(types, energy);
    }
    if ((valid && (!out.best_valid || energy < out.best_energy)) ||
        (!valid && !out.best_valid && energy < out.best_energy)) {
      out.best_valid = valid;
      out.best_energy = energy;
      out.best_assignment = x;
    }
  };
  consider();
  if (opts.record_trace) out.run.trace.push_back(energy);

  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::uint64_t step = 0; step < sched.n_steps; ++step) {
    const double temperature = sched.temperature(step);
    const std::size_t u = pick(rng);
    const bool on = x[u] != 0;
    const double delta = on ? -field[u] : field[u];
    if (metropolis(delta, temperature, rng)) {
      const std::size_t site = u / k;
      const int m = static_cast<int>(u % k) + 1;
      const int step_sign = on ? -1 : 1;
      violations -= std::max(0, site_hot[site] - 1) + std::abs(type_count[m] - comp.counts[m]);
      site_hot[site] += step_sign;
      type_count[m] += step_sign;
      violations += std::max(0, site_hot[site] - 1) + std::abs(type_count[m] - comp.counts[m]);
      x[u] = on ? 0 : 1;
      const double w_sign = on ? -1.0 : 1.0;
      for (std::size_t q = graph.offsets[u]; q < graph.offsets[u + 1]; ++q) {
        field[graph.neighbors[q]] += w_sign * graph.weights[q];
      }
      energy += delta;
      consider();
      if (opts.record_trace) out.run.trace.push_back(energy);
    }
    if (opts.drift_check_interval && (step + 1) % opts.drift_check_interval == 0) {
      const double exact = qubo_energy(p, x);
      out.max_drift = std::max(out.max_drift, std::abs(exact - energy));
      energy = exact;
    }
  }

  out.best_energy = qubo_energy(p, out.best_assignment);
  out.run.elite = elite.take();
  for (auto& c : out.run.elite) c.value = qubo_energy(p, encode_assignment(c.sequence, d));
  std::sort(out.run.elite.begin(), out.run.elite.end(), candidate_less);
  if (!out.run.elite.empty()) {
    out.run.best = out.run.elite.front().sequence;
    out.run.best_value = out.run.elite.front().value;
  } else {
    out.run.best_value = std::numeric_limits<double>::infinity();
  }
  out.run.wall_seconds = seconds_since(start);
  return out;
}

}  // namespace

QuboRun qubo_sa(const QuboProblem& p, const Composition& comp, const AnnealSchedule& sched,
                std::size_t restarts, const QuboSaOptions& opts) {
  sched.validate();
  if (restarts == 0) throw InvalidArgument("qubo_sa needs at least one restart");
  check_alphabet(comp.alphabet_size());
  const auto k = static_cast<std::size_t>(comp.alphabet_size() - 1);
  if (p.num_vars() != static_cast<std::size_t>(comp.total()) * k) {
    throw InvalidArgument("QUBO size does not match the composition");
  }
  const QuboGraph graph(p);
  std::vector<QuboRestart> results(restarts);
  parallel_chunks(restarts, restarts, opts.threads ? opts.threads : 1,
                  [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t r = begin; r < end; ++r) {
      AnnealSchedule s = sched;
      s.seed = sched.seed + r;
      results[r] = qubo_restart(p, graph, comp, s, opts);
    }
  });

  QuboRun out;
  std::size_t best = 0;
  for (std::size_t r = 0; r < restarts; ++r) {
    const auto& a = results[r];
    const auto& b = results[best];
    if ((a.best_valid && !b.best_valid) || (a.best_valid == b.best_valid && a.best_energy < b.best_energy)) {
      best = r;
    }
    out.max_drift = std::max(out.max_drift, a.max_drift);
  }
  out.assignment = results[best].best_assignment;
  out.energy = results[best].best_energy;
  out.report = decode(out.assignment, comp);
  out.restarts.reserve(restarts);
  for (auto& r : results) out.restarts.push_back(std::move(r.run));
  return out;
}

ExhaustiveRanking::ExhaustiveRanking(Composition comp, std::vector<Entry> entries)
    : comp_(std::move(comp)), entries_(std::move(entries)) {}

ExhaustiveRanking exhaustive_sequence_search(const Composition& comp, const SequenceObjective& objective,
                                             std::uint64_t max_sequences, unsigned threads) {
  const auto total_count = multinomial_count(comp);
  if (!total_count || *total_count > max_sequences) {
    throw ResourceLimitError("composition " + comp.to_string() + " exceeds the exhaustive search cap of " +
                                 std::to_string(max_sequences) + " sequences",
                             total_count.value_or(UINT64_MAX));
  }
  const auto total = static_cast<std::size_t>(*total_count);
  std::vector<ExhaustiveRanking::Entry> entries(total);
  if (threads == 0) threads = default_thread_count();
  parallel_chunks(total, std::min<std::size_t>(total, 4ull * threads), threads,
                  [&](std::size_t begin, std::size_t end, std::size_t) {
    Sequence seq = nth_sequence(comp, begin);
    auto& types = seq.mutable_types();
    for (std::size_t r = begin; r < end; ++r) {
      entries[r] = {r, objective(types)};
      std::next_permutation(types.begin(), types.end());
    }
  });
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.value < b.value; });
  return ExhaustiveRanking(comp, std::move(entries));
}

ExhaustiveRanking exhaustive_sequence_search(const Composition& comp, const ScoringFunction& g,
                                             std::uint64_t max_sequences, unsigned threads) {
  return exhaustive_sequence_search(
      comp, [&g](std::span<const std::uint8_t> t) { return g(t); }, max_sequences, threads);
}

std::vector<Candidate> select_candidates(std::span<const SolverRun> runs, std::size_t k) {
  if (k == 0) throw InvalidArgument("select_candidates needs K >= 1");
  std::map<Sequence, double> best;
  for (const auto& run : runs) {
    for (const auto& c : run.elite) {
      auto [it, inserted] = best.emplace(c.sequence, c.value);
      if (!inserted) it->second = std::min(it->second, c.value);
    }
    if (run.found()) {
      auto [it, inserted] = best.emplace(run.best, run.best_value);
      if (!inserted) it->second = std::min(it->second, run.best_value);
    }
  }
  std::vector<Candidate> pool;
  pool.reserve(best.size());
  for (auto& [seq, value] : best) pool.push_back({seq, value});
  std::sort(pool.begin(), pool.end(), candidate_less);
  if (pool.size() > k) pool.resize(k);
  return pool;
}

std::vector<SolverRun> run_restarts(std::size_t restarts, std::uint64_t base_seed, unsigned threads,
                                    const std::function<SolverRun(std::uint64_t)>& run) {
  std::vector<SolverRun> runs(restarts);
  parallel_chunks(restarts, restarts, threads ? threads : 1, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t r = begin; r < end; ++r) runs[r] = run(base_seed + r);
  });
  return runs;
}

std::vector<SolverRun> timed_restarts(std::chrono::milliseconds budget, std::uint64_t base_seed,
                                      const std::function<SolverRun(std::uint64_t)>& run) {
  std::vector<SolverRun> runs;
  const auto start = Clock::now();
  do {
    runs.push_back(run(base_seed + runs.size()));
  } while (Clock::now() - start < budget);
  return runs;
}

}  // namespace latdesign
