#pragma once

// Pairwise-contact energies, the approximate design score G(S), and exact
// Boltzmann fold probabilities over an enumerated ensemble.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latdesign/lattice.hpp"

namespace latdesign {

/// Absolute tolerance under which two energies count as degenerate.
inline constexpr double kDegeneracyTolerance = 1e-9;

inline constexpr int kMinAlphabet = 2;
inline constexpr int kMaxAlphabet = 26;

void check_alphabet(int alphabet_size);

/// Residue types are stored 0-based; text and JSON use the 1-based labels 1..D.
class Sequence {
 public:
  Sequence() = default;
  explicit Sequence(std::vector<std::uint8_t> types) : types_(std::move(types)) {}

  static Sequence from_labels(std::span<const int> labels);
  /// Parses "1,2,3" or "1 2 3".
  static Sequence parse(std::string_view text);

  std::size_t size() const noexcept { return types_.size(); }
  std::uint8_t operator[](std::size_t i) const { return types_[i]; }
  std::span<const std::uint8_t> types() const noexcept { return types_; }
  std::vector<std::uint8_t>& mutable_types() noexcept { return types_; }

  std::vector<int> labels() const;
  std::string to_string() const;
  Sequence reversed() const;

  friend auto operator<=>(const Sequence&, const Sequence&) = default;
  friend bool operator==(const Sequence&, const Sequence&) = default;

 private:
  std::vector<std::uint8_t> types_;
};

/// Per-type residue counts N_1..N_D.
struct Composition {
  std::vector<int> counts;

  int alphabet_size() const noexcept { return static_cast<int>(counts.size()); }
  int total() const noexcept;
  /// Parses "5,5,6".
  static Composition parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const Composition&, const Composition&) = default;
};

Composition composition_of(const Sequence& s, int alphabet_size);

/// Number of distinct sequences with this composition, or nullopt past 2^64.
std::optional<std::uint64_t> multinomial_count(const Composition& comp);

/// Sorted (lexicographically smallest) sequence of the composition.
Sequence first_sequence(const Composition& comp);

/// The rank-th sequence (0-based) of the composition in lexicographic order.
Sequence nth_sequence(const Composition& comp, std::uint64_t rank);

/// Inverse of nth_sequence.
std::uint64_t sequence_rank(const Composition& comp, const Sequence& s);

/// Symmetric D x D contact energy matrix.
class EnergyMatrix {
 public:
  EnergyMatrix() = default;
  /// Row-major entries; throws unless symmetric within kDegeneracyTolerance.
  EnergyMatrix(int alphabet_size, std::vector<double> entries);
  /// Averages the matrix with its transpose.
  static EnergyMatrix symmetrized(int alphabet_size, std::vector<double> entries,
                                  double* max_asymmetry = nullptr);
  static EnergyMatrix constant(int alphabet_size, double value);

  int alphabet_size() const noexcept { return d_; }
  double operator()(int m, int n) const { return entries_[static_cast<std::size_t>(m) * d_ + n]; }
  std::span<const double> entries() const noexcept { return entries_; }
  EnergyMatrix scaled(double factor) const;

  friend bool operator==(const EnergyMatrix&, const EnergyMatrix&) = default;

 private:
  int d_ = 0;
  std::vector<double> entries_;
};

/// The ground-truth matrices for D = 3, 4, 5 used for structure prediction.
EnergyMatrix ground_truth_matrix(int alphabet_size);

struct EnergyMatrixLoad {
  EnergyMatrix matrix;
  double max_asymmetry = 0.0;
  bool warned() const noexcept { return max_asymmetry > kDegeneracyTolerance; }
};

/// D lines of D whitespace-separated decimals; symmetrized on load.
EnergyMatrixLoad read_energy_matrix(std::istream& in);
EnergyMatrixLoad read_energy_matrix_file(const std::string& path);
void write_energy_matrix(std::ostream& out, const EnergyMatrix& e);

/// C(target) - <C>: the weights of the approximate design score.
class DeltaContactMap {
 public:
  struct Entry {
    std::uint16_t i;
    std::uint16_t j;
    double value;
  };

  DeltaContactMap() = default;
  DeltaContactMap(const ContactMap& target, const AverageContactMap& average);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return dense_[i * n_ + j]; }
  /// Upper-triangle entries with |value| >= 1e-12.
  const std::vector<Entry>& nonzero() const noexcept { return nonzero_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(dense_).subspan(i * n_, n_);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> dense_;
  std::vector<Entry> nonzero_;
};

/// Sum over contacts i < j of eps(s_i, s_j).
double contact_energy(const ContactMap& c, const Sequence& s, const EnergyMatrix& e);

/// Sum over i < j of <C>_ij eps(s_i, s_j): the database reference energy.
double reference_energy(const AverageContactMap& avg, const Sequence& s, const EnergyMatrix& e);

/// Approximate design score: sum over i < j of eps(s_i, s_j) dC_ij.
double scoring_g(const DeltaContactMap& dc, const Sequence& s, const EnergyMatrix& e);

/// Energies of `s` mounted on every structure of the ensemble.
std::vector<double> ensemble_energies(const Sequence& s, std::span<const ContactMap> ensemble,
                                      const EnergyMatrix& e);

/// Boltzmann occupation of state `index`, normalized after shifting by the minimum energy.
double boltzmann_probability(std::span<const double> energies, std::size_t index, double beta);

double fold_probability(const Sequence& s, std::size_t target_index,
                        std::span<const ContactMap> ensemble, const EnergyMatrix& e, double beta);

/// True iff `target_index` is the strict unique minimizer and its occupation reaches p_fold.
bool is_designing(const Sequence& s, std::size_t target_index,
                  std::span<const ContactMap> ensemble, const EnergyMatrix& e_truth, double beta,
                  double p_fold);

/// G(S) with precomputed weights, plus O(N) swap updates for annealing.
class ScoringFunction {
 public:
  ScoringFunction(DeltaContactMap dc, EnergyMatrix e);

  double operator()(const Sequence& s) const;
  double operator()(std::span<const std::uint8_t> types) const;
  /// G(S with positions i and j exchanged) - G(S).
  double swap_delta(std::span<const std::uint8_t> types, std::size_t i, std::size_t j) const;

  const DeltaContactMap& delta() const noexcept { return dc_; }
  const EnergyMatrix& matrix() const noexcept { return e_; }
  std::size_t length() const noexcept { return dc_.size(); }

 private:
  DeltaContactMap dc_;
  EnergyMatrix e_;
};

}  // namespace latdesign
