#pragma once

// Compact conformations on square lattices: validation, symmetry reduction,
// exhaustive enumeration, and (average) contact maps.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace latdesign {

struct Site {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Site&, const Site&) = default;
};

/// A self-avoiding chain visiting every site of an L x L grid exactly once.
///
/// The constructor validates the compactness invariants and throws
/// InvalidArgument on failure, so every live instance is a valid
/// Hamiltonian path of its grid.
class Conformation {
 public:
  explicit Conformation(std::vector<Site> sites);

  int side() const noexcept { return side_; }
  std::size_t size() const noexcept { return sites_.size(); }
  std::span<const Site> sites() const noexcept { return sites_; }
  const Site& operator[](std::size_t i) const { return sites_[i]; }

  Conformation reversed() const;

  friend bool operator==(const Conformation&, const Conformation&) = default;
  friend auto operator<=>(const Conformation& a, const Conformation& b) {
    return a.sites_ <=> b.sites_;
  }

 private:
  struct Unchecked {};
  Conformation(Unchecked, int side, std::vector<Site> sites)
      : side_(side), sites_(std::move(sites)) {}

  friend Conformation apply_symmetry(const Conformation&, int, bool);
  friend class ChainBuilder;

  int side_ = 0;
  std::vector<Site> sites_;
};

/// True iff `sites` is a compact chain on a side x side grid.
bool is_compact_chain(std::span<const Site> sites, int side);

/// Which transformations are considered equivalent when reducing conformations.
enum class Symmetry {
  /// The 8 point symmetries of the square. Preserves contact maps exactly.
  point,
  /// The 8 point symmetries combined with chain reversal (16 maps).
  point_and_reversal,
};

/// Applies point symmetry `op` in [0, 8) and optionally reverses the chain.
/// op encodes (transpose, flip_x, flip_y) as bits 2, 1, 0.
Conformation apply_symmetry(const Conformation& c, int op, bool reverse);

/// Lexicographically smallest image of `c` under the 16 point-and-reversal maps.
Conformation canonical_form(const Conformation& c);
Conformation canonical_form(const Conformation& c, Symmetry symmetry);

struct EnumerationOptions {
  Symmetry symmetry = Symmetry::point;
  /// Enumeration above this side length requires `allow_large`.
  int max_side = 6;
  bool allow_large = false;
};

/// All directed compact paths on the grid, in DFS order. No symmetry reduction.
std::vector<Conformation> enumerate_directed_paths(int side, const EnumerationOptions& opts = {});

/// One representative (the canonical form) per symmetry class, sorted lexicographically.
std::vector<Conformation> enumerate_compact_conformations(int side,
                                                          const EnumerationOptions& opts = {});

/// Row-wise serpentine path; always compact.
Conformation serpentine(int side);

/// Draws compact conformations with the backbite Markov chain, starting
/// from a serpentine. Used as a reference database where enumeration is out
/// of reach. `sweeps_between` counts N-move sweeps between recorded samples.
std::vector<Conformation> sample_compact_conformations(int side, std::size_t count,
                                                       std::uint64_t seed,
                                                       std::size_t sweeps_between = 20);

/// Binary contact map: C_ij = 1 iff sites i, j are lattice neighbours and |i - j| > 1.
class ContactMap {
 public:
  ContactMap() = default;
  explicit ContactMap(const Conformation& c);

  std::size_t size() const noexcept { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  /// Contacts as (i, j) with i < j, ordered lexicographically.
  const std::vector<std::pair<std::uint16_t, std::uint16_t>>& pairs() const noexcept {
    return pairs_;
  }
  std::size_t num_contacts() const noexcept { return pairs_.size(); }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<std::pair<std::uint16_t, std::uint16_t>> pairs_;
};

/// Entrywise mean of a set of contact maps of equal size.
class AverageContactMap {
 public:
  AverageContactMap() = default;
  AverageContactMap(std::size_t n, std::vector<double> entries);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  std::span<const double> entries() const noexcept { return entries_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

AverageContactMap average_contact_map(std::span<const Conformation> db);
AverageContactMap average_contact_map(std::span<const ContactMap> maps);

/// A structure database with precomputed contact maps and their average.
class CompactEnsemble {
 public:
  explicit CompactEnsemble(std::vector<Conformation> conformations);

  /// Full symmetry-reduced enumeration for the given side.
  static CompactEnsemble enumerate(int side, const EnumerationOptions& opts = {});

  int side() const noexcept { return side_; }
  std::size_t chain_length() const noexcept { return chain_length_; }
  std::size_t size() const noexcept { return conformations_.size(); }
  const Conformation& conformation(std::size_t k) const { return conformations_[k]; }
  const std::vector<Conformation>& conformations() const noexcept { return conformations_; }
  const ContactMap& contact_map(std::size_t k) const { return maps_[k]; }
  const std::vector<ContactMap>& contact_maps() const noexcept { return maps_; }
  const AverageContactMap& average() const noexcept { return average_; }

  /// Index of the conformation equivalent to `c` under point symmetries, if any.
  std::ptrdiff_t find(const Conformation& c) const;

 private:
  int side_ = 0;
  std::size_t chain_length_ = 0;
  std::vector<Conformation> conformations_;
  std::vector<ContactMap> maps_;
  AverageContactMap average_;
};

/// One conformation per line as space-separated "x,y" pairs. Blank lines and
/// lines starting with '#' are skipped. Every conformation is validated.
std::vector<Conformation> read_conformations(std::istream& in);
std::vector<Conformation> read_conformations_file(const std::string& path);
void write_conformations(std::ostream& out, std::span<const Conformation> confs);
void write_conformations_file(const std::string& path, std::span<const Conformation> confs);

}  // namespace latdesign
