#pragma once

// Fixed-composition minimization of G(S) as a QUBO over N(D-1) one-hot bits.
//
// Bit (i, m) for residue type m in 2..D (0-based types 1..D-1) lives at
// var_index(i, m) = i (D - 1) + (m - 2). Type 1 is encoded by all of a
// site's bits being zero.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latdesign/energy.hpp"

namespace latdesign {

using Assignment = std::vector<std::uint8_t>;

struct QuboWeights {
  double a1 = 2.1;  ///< composition penalty
  double a2 = 2.1;  ///< double-occupancy penalty
  double b = 1.0;   ///< contact (G) term

  void validate() const;
};

struct QuboTerm {
  std::uint32_t u = 0;
  std::uint32_t v = 0;  ///< u <= v; u == v is a linear term
  double coeff = 0.0;

  friend bool operator==(const QuboTerm&, const QuboTerm&) = default;
};

class QuboProblem {
 public:
  QuboProblem() = default;
  /// Terms must be sorted by (u, v), unique, u <= v < num_vars, and non-zero.
  QuboProblem(std::size_t num_vars, std::vector<QuboTerm> terms, double offset);

  std::size_t num_vars() const noexcept { return num_vars_; }
  std::span<const QuboTerm> terms() const noexcept { return terms_; }
  double offset() const noexcept { return offset_; }

  friend bool operator==(const QuboProblem&, const QuboProblem&) = default;

 private:
  std::size_t num_vars_ = 0;
  std::vector<QuboTerm> terms_;
  double offset_ = 0.0;
};

/// 0-based residue type t >= 1 at site i.
inline std::size_t var_index(std::size_t site, int type, int alphabet_size) {
  return site * static_cast<std::size_t>(alphabet_size - 1) + static_cast<std::size_t>(type - 1);
}

/// Builds H = H_comp + H_occ + H_contact. Valid one-hot assignments of a
/// sequence with composition `comp` evaluate to B * G(S).
QuboProblem encode(const DeltaContactMap& dc, const EnergyMatrix& e, const Composition& comp,
                   const QuboWeights& w);

/// Non-empty when the penalties are below twice B times the largest |dC * eps|
/// row scale. Advisory only.
std::optional<std::string> dominance_warning(const DeltaContactMap& dc, const EnergyMatrix& e,
                                             const QuboWeights& w);

Assignment encode_assignment(const Sequence& s, int alphabet_size);

struct DecodeReport {
  std::optional<Sequence> sequence;
  /// Sites with two or more hot bits.
  std::vector<std::size_t> double_occupied;
  /// Observed minus required count per type (type 1 inferred from empty sites).
  std::vector<int> composition_delta;

  bool valid() const noexcept { return sequence.has_value(); }
};

DecodeReport decode(std::span<const std::uint8_t> a, const Composition& comp);

double qubo_energy(const QuboProblem& p, std::span<const std::uint8_t> a);

/// Text format: "qubo <num_vars> <num_terms> <offset>" then "u v coeff" per
/// term, reals printed with 17 significant digits.
void write_qubo(std::ostream& out, const QuboProblem& p);
QuboProblem read_qubo(std::istream& in);
void export_qubo(const QuboProblem& p, const std::string& path);
QuboProblem import_qubo(const std::string& path);

}  // namespace latdesign
