#pragma once

// Sequence selection: minimization of G(S) at fixed composition.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "latdesign/energy.hpp"
#include "latdesign/qubo.hpp"

namespace latdesign {

struct AnnealSchedule {
  double t_max = 100.0;
  double t_min = 1e-4;
  std::uint64_t n_steps = 10'000;
  std::uint64_t seed = 0;

  void validate() const;
  /// Geometric interpolation t_max (t_min / t_max)^(k / n_steps).
  double temperature(std::uint64_t step) const;
};

struct Candidate {
  Sequence sequence;
  double value = 0.0;
};

struct SolverRun {
  /// Empty when the run never visited a valid sequence (QUBO runs only).
  Sequence best;
  double best_value = 0.0;
  /// Lowest-valued distinct sequences visited, ascending; includes `best`.
  std::vector<Candidate> elite;
  /// Objective after every accepted move, when requested.
  std::vector<double> trace;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;

  bool found() const noexcept { return best.size() > 0; }
};

struct RunOptions {
  std::size_t elite_size = 1;
  bool record_trace = false;
};

/// Swap-move Metropolis annealing; composition is conserved.
SolverRun sequence_sa(const ScoringFunction& g, const Sequence& init, const AnnealSchedule& sched,
                      const RunOptions& opts = {});

/// Uniformly random arrangement of the composition.
Sequence random_sequence(const Composition& comp, std::uint64_t seed);

enum class QuboInit { random_valid, random_bits };

struct QuboRun {
  /// Best assignment over all restarts: valid ones preferred, then lowest energy.
  Assignment assignment;
  double energy = 0.0;
  DecodeReport report;
  /// One entry per restart, seeds sched.seed + r; values are QUBO energies.
  std::vector<SolverRun> restarts;
  /// Largest |incremental - recomputed| energy seen at the periodic checks.
  double max_drift = 0.0;
};

struct QuboSaOptions : RunOptions {
  QuboInit init = QuboInit::random_valid;
  unsigned threads = 1;
  /// Recompute the energy from scratch every this many steps (0 disables).
  std::uint64_t drift_check_interval = 1000;
};

/// Single-bit-flip Metropolis annealing over the QUBO with incremental local
/// fields. Each restart tracks the best valid assignment it visits.
QuboRun qubo_sa(const QuboProblem& p, const Composition& comp, const AnnealSchedule& sched,
                std::size_t restarts, const QuboSaOptions& opts = {});

/// Ascending-value list over every sequence of a composition. Entries hold the
/// lexicographic rank, so equal values keep lexicographic order.
class ExhaustiveRanking {
 public:
  struct Entry {
    std::uint64_t rank = 0;
    double value = 0.0;
  };

  ExhaustiveRanking(Composition comp, std::vector<Entry> entries);

  const Composition& composition() const noexcept { return comp_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  Sequence sequence(std::size_t position) const { return nth_sequence(comp_, entries_[position].rank); }

 private:
  Composition comp_;
  std::vector<Entry> entries_;
};

using SequenceObjective = std::function<double(std::span<const std::uint8_t>)>;

ExhaustiveRanking exhaustive_sequence_search(const Composition& comp, const SequenceObjective& objective,
                                             std::uint64_t max_sequences = 10'000'000, unsigned threads = 0);
ExhaustiveRanking exhaustive_sequence_search(const Composition& comp, const ScoringFunction& g,
                                             std::uint64_t max_sequences = 10'000'000, unsigned threads = 0);

/// Pools the elites of all runs, keeps the lowest value per distinct sequence
/// and returns the K best by (value, sequence).
std::vector<Candidate> select_candidates(std::span<const SolverRun> runs, std::size_t k);

/// Runs `run(seed)` with seeds base_seed, base_seed + 1, ... threads at a time
/// and returns the runs ordered by seed.
std::vector<SolverRun> run_restarts(std::size_t restarts, std::uint64_t base_seed, unsigned threads,
                                    const std::function<SolverRun(std::uint64_t)>& run);

/// Keeps launching restarts until `budget` has elapsed; at least one run.
std::vector<SolverRun> timed_restarts(std::chrono::milliseconds budget, std::uint64_t base_seed,
                                      const std::function<SolverRun(std::uint64_t)>& run);

}  // namespace latdesign
