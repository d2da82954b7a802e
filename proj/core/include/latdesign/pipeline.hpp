#pragma once

// The iterative design loop: select sequences under the current energy
// matrix, fold them with the ground-truth oracle, refine the matrix.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latdesign/energy.hpp"
#include "latdesign/fold_oracle.hpp"
#include "latdesign/lattice.hpp"
#include "latdesign/metrics.hpp"
#include "latdesign/qubo.hpp"
#include "latdesign/solvers.hpp"

namespace latdesign {

enum class SolverKind { sequence_sa, qubo_sa };

const char* to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

struct TargetChoice {
  /// Empty: the structure with the most designing sequences.
  std::optional<std::size_t> index;
  /// Conformation file (first entry used); overrides `index`.
  std::string file;
  /// Confirm designability by census. Fails when the census is over the cap.
  bool verify = true;
};

struct StopRule {
  bool enabled = true;
  double f_c_threshold = 0.5;
  /// Also stop as soon as any single candidate designs the target.
  bool any_designing = true;
};

struct DesignConfig {
  int side = 4;
  Composition composition{{5, 5, 6}};
  TargetChoice target;
  /// Ground-truth matrix file; empty selects the built-in matrix for D.
  std::string truth_matrix;
  /// Initial matrix: "random", "truth", or a matrix file path.
  std::string init = "random";
  std::uint64_t init_seed = 1;

  double beta = 3.0;
  double p_fold = 0.8;
  QuboWeights weights;
  /// 0 selects default_eta0(D).
  double eta0 = 0.0;
  std::size_t max_perceptron_iters = 100'000;

  SolverKind solver = SolverKind::sequence_sa;
  AnnealSchedule schedule;
  std::size_t restarts = 200;
  /// Extra restart batches allowed when fewer than K distinct sequences come back.
  std::size_t max_restart_batches = 4;
  std::size_t elite_size = 30;
  std::size_t candidates = 30;
  std::size_t max_cycles = 5;
  std::size_t n_max = kDefaultMaxCompetitors;
  StopRule stop;
  std::uint64_t seed = 12345;

  /// Rank every sequence under each cycle's matrix and report ROC Q against
  /// the ground-truth designing set. Needs a feasible census.
  bool evaluate_roc = false;
  std::uint64_t census_cap = 10'000'000;
  unsigned threads = 0;

  int alphabet_size() const noexcept { return composition.alphabet_size(); }
  void validate() const;
};

DesignConfig parse_design_config(const std::string& json_text);
DesignConfig load_design_config(const std::filesystem::path& path);
std::string design_config_to_json(const DesignConfig& cfg);
/// FNV-1a of the canonical JSON form.
std::uint64_t config_hash(const DesignConfig& cfg);

/// Seed of restart r in cycle k.
inline std::uint64_t restart_seed(std::uint64_t master, std::size_t cycle, std::size_t restart) {
  return master + static_cast<std::uint64_t>(cycle) * 1'000'000ull + restart;
}

struct TargetSelection {
  std::size_t index = 0;
  /// Designing-sequence count, when a census was run.
  std::optional<std::uint64_t> designing;
};

TargetSelection select_target(const CompactEnsemble& ensemble, const Composition& comp,
                              const EnergyMatrix& e_truth, double beta, double p_fold,
                              const TargetChoice& choice, const CensusOptions& census = {});

struct CandidateOutcome {
  Sequence sequence;
  double g = 0.0;
  std::size_t native = 0;
  double p_native = 0.0;
  bool unique = false;
  bool designing = false;
};

struct CycleRecord {
  std::size_t cycle = 0;
  EnergyMatrix epsilon;
  std::vector<CandidateOutcome> candidates;
  SuccessRecord success;
  std::optional<double> roc_q;
  std::size_t cumulative_sequences = 0;
  /// The stop rule fired on this cycle's candidates.
  bool stopped = false;
  /// Refinement after this cycle; absent on the final cycle.
  bool refined = false;
  double eta = 0.0;
  std::size_t constraints = 0;
  std::size_t perceptron_updates = 0;
  bool separable = true;
  double violation = 0.0;
  EnergyMatrix next_epsilon;
};

enum class DesignStatus { solved, max_cycles, non_separable };
const char* to_string(DesignStatus s);

struct DesignReport {
  std::uint64_t config_hash = 0;
  std::size_t target = 0;
  std::optional<Conformation> target_conformation;
  std::optional<std::uint64_t> target_designing;
  std::vector<CycleRecord> cycles;
  DesignStatus status = DesignStatus::max_cycles;
};

std::string report_to_json(const DesignReport& report);

struct DesignRunOptions {
  /// Parent of the per-config run directory; empty disables checkpoints.
  std::filesystem::path output_dir;
  /// Continue from the checkpoints found in the run directory.
  bool resume = true;
  /// Stop after this many new cycles (for interruption tests).
  std::optional<std::size_t> cycle_limit;
};

/// Directory holding the checkpoints of `cfg` below `output_dir`.
std::filesystem::path run_directory(const std::filesystem::path& output_dir, const DesignConfig& cfg);

DesignReport run_design(const DesignConfig& cfg, const DesignRunOptions& opts = {});

/// f_c >= threshold, or (optionally) at least one designing candidate.
bool stop_rule(std::span<const FoldResult> folds, std::size_t target, const StopRule& rule);

struct BenchmarkConfig {
  /// Conformation file; the first entry is the target.
  std::string target_file;
  Composition composition{{27, 27, 27}};
  std::string truth_matrix;
  QuboWeights weights;
  /// Total wall time per solver, shared by all its samples.
  std::uint64_t budget_ms = 3000;
  std::size_t samples = 1000;
  std::size_t bins = kDefaultHistogramBins;
  /// Reference ensemble for <C>: enumeration up to 6x6, backbite samples above.
  std::size_t reference_samples = 2000;
  std::uint64_t seed = 7;
  double t_max = 100.0;
  double t_min = 1e-4;
};

struct SolverBenchmark {
  std::string solver;
  std::vector<double> values;
  std::uint64_t steps_per_sample = 0;
  double wall_seconds = 0.0;
  double min = 0.0;
  double median = 0.0;
  std::size_t valid = 0;
};

struct BenchmarkReport {
  std::vector<SolverBenchmark> solvers;
};

/// Runs both annealers for equal wall-time budgets and writes
/// hist_<solver>.csv, values_<solver>.csv and summary.json into `out_dir`.
BenchmarkReport benchmark_solvers(const BenchmarkConfig& cfg, const std::filesystem::path& out_dir);

/// Mean contact map for a conformation's lattice: exact ensemble up to 6x6,
/// backbite samples otherwise.
AverageContactMap reference_average(int side, std::size_t samples, std::uint64_t seed);

}  // namespace latdesign
