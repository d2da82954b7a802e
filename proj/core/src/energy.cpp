#include "latdesign/energy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "latdesign/errors.hpp"

namespace latdesign {

__extension__ typedef unsigned __int128 u128;


namespace {

std::vector<int> parse_int_list(std::string_view text, const char* what) {
  std::vector<int> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw InvalidArgument(std::string("malformed ") + what + ": '" + token + "'");
    out.push_back(v);
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return out;
}

void check_lengths(std::size_t n, const Sequence& s) {
  if (s.size() != n) {
    throw InvalidArgument("sequence length " + std::to_string(s.size()) +
                          " does not match chain length " + std::to_string(n));
  }
}

void check_types(const Sequence& s, const EnergyMatrix& e) {
  for (auto t : s.types()) {
    if (t >= e.alphabet_size()) throw InvalidArgument("residue type outside the energy matrix alphabet");
  }
}

}  // namespace

void check_alphabet(int alphabet_size) {
  if (alphabet_size < kMinAlphabet || alphabet_size > kMaxAlphabet) {
    throw InvalidArgument("alphabet size must be in [2, 26], got " + std::to_string(alphabet_size));
  }
}

Sequence Sequence::from_labels(std::span<const int> labels) {
  std::vector<std::uint8_t> types;
  types.reserve(labels.size());
  for (int l : labels) {
    if (l < 1 || l > kMaxAlphabet) throw InvalidArgument("residue label out of range: " + std::to_string(l));
    types.push_back(static_cast<std::uint8_t>(l - 1));
  }
  return Sequence(std::move(types));
}

Sequence Sequence::parse(std::string_view text) {
  const auto labels = parse_int_list(text, "sequence");
  return from_labels(labels);
}

std::vector<int> Sequence::labels() const {
  std::vector<int> out;
  out.reserve(types_.size());
  for (auto t : types_) out.push_back(t + 1);
  return out;
}

std::string Sequence::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(types_[i] + 1);
  }
  return out;
}

Sequence Sequence::reversed() const {
  return Sequence(std::vector<std::uint8_t>(types_.rbegin(), types_.rend()));
}

int Composition::total() const noexcept {
  int t = 0;
  for (int c : counts) t += c;
  return t;
}

Composition Composition::parse(std::string_view text) {
  Composition comp{parse_int_list(text, "composition")};
  check_alphabet(comp.alphabet_size());
  for (int c : comp.counts) {
    if (c < 0) throw InvalidArgument("composition counts must be non-negative");
  }
  return comp;
}

std::string Composition::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(counts[i]);
  }
  return out;
}

Composition composition_of(const Sequence& s, int alphabet_size) {
  Composition comp{std::vector<int>(static_cast<std::size_t>(alphabet_size), 0)};
  for (auto t : s.types()) {
    if (t >= alphabet_size) throw InvalidArgument("residue type outside alphabet");
    ++comp.counts[t];
  }
  return comp;
}

std::optional<std::uint64_t> multinomial_count(const Composition& comp) {
  // Product of binomials C(n_1 + ... + n_k, n_k), each exact in 128 bits.
  u128 result = 1;
  std::uint64_t placed = 0;
  for (int c : comp.counts) {
    if (c < 0) throw InvalidArgument("composition counts must be non-negative");
    u128 binom = 1;
    for (int k = 1; k <= c; ++k) {
      binom = binom * (placed + static_cast<std::uint64_t>(k)) / static_cast<std::uint64_t>(k);
      if (binom > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
    }
    placed += static_cast<std::uint64_t>(c);
    result *= binom;
    if (result > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  }
  return static_cast<std::uint64_t>(result);
}

Sequence first_sequence(const Composition& comp) {
  std::vector<std::uint8_t> types;
  types.reserve(static_cast<std::size_t>(comp.total()));
  for (int m = 0; m < comp.alphabet_size(); ++m) {
    types.insert(types.end(), static_cast<std::size_t>(comp.counts[m]), static_cast<std::uint8_t>(m));
  }
  return Sequence(std::move(types));
}

Sequence nth_sequence(const Composition& comp, std::uint64_t rank) {
  const auto total = multinomial_count(comp);
  if (!total || rank >= *total) throw InvalidArgument("sequence rank out of range");
  std::vector<int> left = comp.counts;
  int remaining = comp.total();
  std::vector<std::uint8_t> types;
  types.reserve(static_cast<std::size_t>(remaining));
  std::uint64_t block = *total;
  for (; remaining > 0; --remaining) {
    for (int m = 0; m < comp.alphabet_size(); ++m) {
      if (left[m] == 0) continue;
      // Sequences of the remaining multiset that start with type m.
      const auto with_m = static_cast<std::uint64_t>(
          static_cast<u128>(block) * static_cast<unsigned>(left[m]) /
          static_cast<unsigned>(remaining));
      if (rank < with_m) {
        types.push_back(static_cast<std::uint8_t>(m));
        --left[m];
        block = with_m;
        break;
      }
      rank -= with_m;
    }
  }
  return Sequence(std::move(types));
}

std::uint64_t sequence_rank(const Composition& comp, const Sequence& s) {
  const auto total = multinomial_count(comp);
  if (!total) throw InvalidArgument("composition too large to rank");
  if (s.size() != static_cast<std::size_t>(comp.total())) throw InvalidArgument("sequence length does not match");
  std::vector<int> left = comp.counts;
  int remaining = comp.total();
  std::uint64_t block = *total;
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < s.size(); ++i, --remaining) {
    const int t = s[i];
    if (t >= comp.alphabet_size() || left[t] == 0) throw InvalidArgument("sequence does not match the composition");
    for (int m = 0; m < t; ++m) {
      rank += static_cast<std::uint64_t>(static_cast<u128>(block) * static_cast<unsigned>(left[m]) /
                                         static_cast<unsigned>(remaining));
    }
    block = static_cast<std::uint64_t>(static_cast<u128>(block) * static_cast<unsigned>(left[t]) /
                                       static_cast<unsigned>(remaining));
    --left[t];
  }
  return rank;
}

EnergyMatrix::EnergyMatrix(int alphabet_size, std::vector<double> entries)
    : d_(alphabet_size), entries_(std::move(entries)) {
  if (d_ < 1 || entries_.size() != static_cast<std::size_t>(d_) * d_) {
    throw InvalidArgument("energy matrix must be D x D");
  }
  for (int m = 0; m < d_; ++m) {
    for (int n = m + 1; n < d_; ++n) {
      if (std::abs((*this)(m, n) - (*this)(n, m)) > kDegeneracyTolerance) {
        throw InvalidArgument("energy matrix is not symmetric");
      }
    }
  }
}

EnergyMatrix EnergyMatrix::symmetrized(int alphabet_size, std::vector<double> entries,
                                       double* max_asymmetry) {
  const auto d = static_cast<std::size_t>(alphabet_size);
  if (alphabet_size < 1 || entries.size() != d * d) throw InvalidArgument("energy matrix must be D x D");
  double worst = 0.0;
  for (std::size_t m = 0; m < d; ++m) {
    for (std::size_t n = m + 1; n < d; ++n) {
      const double a = entries[m * d + n];
      const double b = entries[n * d + m];
      worst = std::max(worst, std::abs(a - b));
      entries[m * d + n] = entries[n * d + m] = 0.5 * (a + b);
    }
  }
  if (max_asymmetry) *max_asymmetry = worst;
  return EnergyMatrix(alphabet_size, std::move(entries));
}

EnergyMatrix EnergyMatrix::constant(int alphabet_size, double value) {
  return EnergyMatrix(alphabet_size,
                      std::vector<double>(static_cast<std::size_t>(alphabet_size) * alphabet_size, value));
}

EnergyMatrix EnergyMatrix::scaled(double factor) const {
  std::vector<double> e = entries_;
  for (double& v : e) v *= factor;
  return EnergyMatrix(d_, std::move(e));
}

EnergyMatrix ground_truth_matrix(int alphabet_size) {
  switch (alphabet_size) {
    case 3:
      return EnergyMatrix(3, {-0.35346, 0.30399, 0.42582,   //
                              0.30399, 0.17115, -0.30167,   //
                              0.42582, -0.30167, 0.34102});
    case 4:
      return EnergyMatrix(4, {0.05375, 0.21861, 0.00656, 0.14191,    //
                              0.21861, 0.43261, -0.50441, -0.5146,   //
                              0.00656, -0.50441, 0.23041, 0.34485,   //
                              0.14191, -0.5146, 0.34485, 0.34976});
    case 5:
      return EnergyMatrix(5, {-0.05777, 0.26095, -0.00228, 0.26162, 0.0197,    //
                              0.26095, 0.14214, -0.37257, 0.13965, 0.18096,    //
                              -0.00228, -0.37257, 0.04771, 0.12568, 0.11891,   //
                              0.26162, 0.13965, 0.12568, -0.38521, 0.02284,    //
                              0.0197, 0.18096, 0.11891, 0.02284, -0.32999});
    default:
      throw InvalidArgument("no bundled ground-truth matrix for D = " + std::to_string(alphabet_size));
  }
}

EnergyMatrixLoad read_energy_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> row;
    double v = 0.0;
    while (ss >> v) row.push_back(v);
    if (!ss.eof()) throw IoError("energy matrix: malformed number in '" + line + "'");
    rows.push_back(std::move(row));
  }
  const std::size_t d = rows.size();
  if (d < 1) throw IoError("energy matrix: no rows");
  std::vector<double> entries;
  entries.reserve(d * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw IoError("energy matrix: expected " + std::to_string(d) + " columns per row");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  EnergyMatrixLoad load;
  load.matrix = EnergyMatrix::symmetrized(static_cast<int>(d), std::move(entries), &load.max_asymmetry);
  return load;
}

EnergyMatrixLoad read_energy_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open energy matrix file: " + path);
  return read_energy_matrix(in);
}

void write_energy_matrix(std::ostream& out, const EnergyMatrix& e) {
  const auto old = out.precision(17);
  for (int m = 0; m < e.alphabet_size(); ++m) {
    for (int n = 0; n < e.alphabet_size(); ++n) {
      if (n) out << ' ';
      out << e(m, n);
    }
    out << '\n';
  }
  out.precision(old);
}

DeltaContactMap::DeltaContactMap(const ContactMap& target, const AverageContactMap& average)
    : n_(target.size()), dense_(n_ * n_, 0.0) {
  if (average.size() != n_) throw InvalidArgument("target and average contact maps differ in size");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      dense_[i * n_ + j] = (target(i, j) ? 1.0 : 0.0) - average(i, j);
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double v = dense_[i * n_ + j];
      if (std::abs(v) >= 1e-12) {
        nonzero_.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j), v});
      }
    }
  }
}

double contact_energy(const ContactMap& c, const Sequence& s, const EnergyMatrix& e) {
  check_lengths(c.size(), s);
  check_types(s, e);
  double total = 0.0;
  for (auto [i, j] : c.pairs()) total += e(s[i], s[j]);
  return total;
}

double reference_energy(const AverageContactMap& avg, const Sequence& s, const EnergyMatrix& e) {
  check_lengths(avg.size(), s);
  check_types(s, e);
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) total += avg(i, j) * e(s[i], s[j]);
  }
  return total;
}

double scoring_g(const DeltaContactMap& dc, const Sequence& s, const EnergyMatrix& e) {
  check_lengths(dc.size(), s);
  check_types(s, e);
  double total = 0.0;
  for (const auto& entry : dc.nonzero()) total += entry.value * e(s[entry.i], s[entry.j]);
  return total;
}

std::vector<double> ensemble_energies(const Sequence& s, std::span<const ContactMap> ensemble,
                                      const EnergyMatrix& e) {
  std::vector<double> out;
  out.reserve(ensemble.size());
  for (const auto& c : ensemble) out.push_back(contact_energy(c, s, e));
  return out;
}

double boltzmann_probability(std::span<const double> energies, std::size_t index, double beta) {
  if (energies.empty()) throw InvalidArgument("Boltzmann weights of an empty ensemble");
  if (index >= energies.size()) throw InvalidArgument("state index outside the ensemble");
  if (beta < 0.0) throw InvalidArgument("inverse temperature must be non-negative");
  const double e_min = *std::min_element(energies.begin(), energies.end());
  double z = 0.0;
  for (double en : energies) z += std::exp(-beta * (en - e_min));
  return std::exp(-beta * (energies[index] - e_min)) / z;
}

double fold_probability(const Sequence& s, std::size_t target_index,
                        std::span<const ContactMap> ensemble, const EnergyMatrix& e, double beta) {
  if (ensemble.empty()) throw InvalidArgument("fold probability over an empty ensemble");
  const auto energies = ensemble_energies(s, ensemble, e);
  return boltzmann_probability(energies, target_index, beta);
}

bool is_designing(const Sequence& s, std::size_t target_index,
                  std::span<const ContactMap> ensemble, const EnergyMatrix& e_truth, double beta,
                  double p_fold) {
  if (ensemble.empty() || target_index >= ensemble.size()) return false;
  const auto energies = ensemble_energies(s, ensemble, e_truth);
  const double target = energies[target_index];
  for (std::size_t k = 0; k < energies.size(); ++k) {
    if (k != target_index && energies[k] <= target + kDegeneracyTolerance) return false;
  }
  return boltzmann_probability(energies, target_index, beta) >= p_fold;
}

ScoringFunction::ScoringFunction(DeltaContactMap dc, EnergyMatrix e)
    : dc_(std::move(dc)), e_(std::move(e)) {}

double ScoringFunction::operator()(const Sequence& s) const { return scoring_g(dc_, s, e_); }

double ScoringFunction::operator()(std::span<const std::uint8_t> types) const {
  double total = 0.0;
  for (const auto& entry : dc_.nonzero()) total += entry.value * e_(types[entry.i], types[entry.j]);
  return total;
}

double ScoringFunction::swap_delta(std::span<const std::uint8_t> types, std::size_t i,
                                   std::size_t j) const {
  const int a = types[i];
  const int b = types[j];
  if (a == b) return 0.0;
  const auto row_i = dc_.row(i);
  const auto row_j = dc_.row(j);
  double delta = 0.0;
  for (std::size_t k = 0; k < types.size(); ++k) {
    if (k == i || k == j) continue;
    const int t = types[k];
    const double diff = e_(b, t) - e_(a, t);
    delta += (row_i[k] - row_j[k]) * diff;
  }
  return delta;
}

}  // namespace latdesign
