#pragma once

// Exhaustive ground-truth structure prediction over a compact ensemble.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "latdesign/energy.hpp"
#include "latdesign/lattice.hpp"

namespace latdesign {

struct SpectrumEntry {
  std::size_t index = 0;
  double energy = 0.0;
};

struct FoldResult {
  /// Every structure, ascending energy, ties broken by ensemble index.
  std::vector<SpectrumEntry> spectrum;
  /// Structures within kDegeneracyTolerance of the minimum, ascending index.
  std::vector<std::size_t> ground_states;
  double p_native = 0.0;
  /// Unique ground state with p_native >= p_fold.
  bool foldable = false;

  std::size_t native() const { return spectrum.front().index; }
  double energy_of(std::size_t structure) const;
};

/// Ground-truth energies for many sequences over one ensemble.
///
/// The union of contact pairs over the ensemble is scored once per sequence;
/// each structure's energy is then a gather-sum over its own pairs, always
/// in the same order, so results do not depend on ensemble order.
class FoldingEngine {
 public:
  FoldingEngine(std::span<const ContactMap> ensemble, EnergyMatrix e_truth);
  explicit FoldingEngine(const CompactEnsemble& ensemble, EnergyMatrix e_truth)
      : FoldingEngine(std::span<const ContactMap>(ensemble.contact_maps()), std::move(e_truth)) {}

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  std::size_t chain_length() const noexcept { return n_; }
  const EnergyMatrix& matrix() const noexcept { return e_; }

  /// Writes one energy per structure into `out` (resized).
  void energies(std::span<const std::uint8_t> types, std::vector<double>& out,
                std::vector<double>& scratch) const;

  FoldResult fold(const Sequence& s, double beta, double p_fold) const;

 private:
  std::size_t n_ = 0;
  EnergyMatrix e_;
  std::vector<std::pair<std::uint16_t, std::uint16_t>> pairs_;
  std::vector<std::uint32_t> pair_index_;
  std::vector<std::size_t> offsets_;
};

FoldResult fold(const Sequence& s, std::span<const ContactMap> ensemble, const EnergyMatrix& e_truth,
                double beta, double p_fold = 0.8);
FoldResult fold(const Sequence& s, const CompactEnsemble& ensemble, const EnergyMatrix& e_truth,
                double beta, double p_fold = 0.8);

inline constexpr std::size_t kDefaultMaxCompetitors = 10;

/// Structures with energy <= energy(target) other than the target, by
/// increasing energy, at most n_max of them.
std::vector<std::size_t> competitors(const FoldResult& fr, std::size_t target,
                                     std::size_t n_max = kDefaultMaxCompetitors);

struct DesignabilityRecord {
  std::size_t structure = 0;
  /// Sequences whose unique ground state is this structure.
  std::uint64_t unique_ground_state = 0;
  /// Of those, the ones that also reach p_fold.
  std::uint64_t designing = 0;
};

struct CensusOptions {
  std::uint64_t max_sequences = 10'000'000;
  bool keep_sequences = true;
  unsigned threads = 0;  ///< 0 = default_thread_count()
};

struct CensusResult {
  std::vector<DesignabilityRecord> records;
  /// Designing sequences per structure, in lexicographic order.
  std::vector<std::vector<Sequence>> designing;
  std::uint64_t total_sequences = 0;

  /// Structure with the most designing sequences (lowest index on ties).
  std::size_t most_designable() const;
};

/// Folds every sequence of the composition and tallies designability.
/// Throws ResourceLimitError when the sequence count exceeds the cap.
CensusResult designability_census(const CompactEnsemble& ensemble, const Composition& comp,
                                  const EnergyMatrix& e_truth, double beta, double p_fold,
                                  const CensusOptions& opts = {});

/// Throws ResourceLimitError unless multinomial_count(comp) <= cap.
std::uint64_t checked_sequence_count(const Composition& comp, std::uint64_t cap);

}  // namespace latdesign
