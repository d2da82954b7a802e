#pragma once

// Energy-function refinement from fold outcomes.
//
// Pair features use the upper triangle (m <= n) in row-major order, one
// component per unordered type pair, and the energy matrix is flattened the
// same way, so eps . n(G, S) is exactly the contact energy.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "latdesign/energy.hpp"
#include "latdesign/fold_oracle.hpp"
#include "latdesign/lattice.hpp"

namespace latdesign {

using EpsilonVector = std::vector<double>;

std::size_t epsilon_size(int alphabet_size);
std::size_t pair_feature_index(int m, int n, int alphabet_size);

EpsilonVector flatten(const EnergyMatrix& e);
EnergyMatrix unflatten(std::span<const double> eps, int alphabet_size);

/// Uniform on [-0.5, 0.5] per independent entry.
EnergyMatrix random_energy_matrix(int alphabet_size, std::uint64_t seed);

std::vector<double> contact_type_vector(const ContactMap& c, const Sequence& s, int alphabet_size);

/// (1/beta) ln(p / (1 - p)): the smallest ground-to-excited gap for which a
/// two-level system reaches fold probability p.
double min_gap(double p_fold, double beta);

/// eta0 / (1 + 3k).
double eta_schedule(std::size_t cycle, double eta0);

/// Tuned step sizes for D = 3, 4, 5; 0.3 otherwise.
double default_eta0(int alphabet_size);

/// eps . x + c >= 0.
struct LinearConstraint {
  std::vector<double> x;
  double c = 0.0;

  double margin(std::span<const double> eps) const;

  friend auto operator<=>(const LinearConstraint&, const LinearConstraint&) = default;
  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

struct FoldedSequence {
  Sequence sequence;
  FoldResult fold;
};

struct ConstraintOptions {
  double p_fold = 0.8;
  double beta = 3.0;
  std::size_t n_max = kDefaultMaxCompetitors;
};

/// For every sequence: the target must not lie below any ground-truth
/// competitor (c = 0). For every foldable sequence: its ground state must lie
/// at least min_gap below each of its next n_max structures. Sorted, unique.
std::vector<LinearConstraint> build_constraints(std::span<const FoldedSequence> history, std::size_t target,
                                                std::span<const ContactMap> ensemble, int alphabet_size,
                                                const ConstraintOptions& opts = {});

struct PerceptronResult {
  EpsilonVector eps;
  std::size_t updates = 0;
  bool satisfied = false;
  /// Sum of max(0, -margin) over all constraints at `eps`.
  double violation = 0.0;
};

double total_violation(std::span<const LinearConstraint> constraints, std::span<const double> eps);

/// Most-violated-constraint perceptron. Returns on the first all-satisfied
/// state, otherwise the visited state of least total violation.
PerceptronResult perceptron_refine(const EpsilonVector& eps, std::span<const LinearConstraint> constraints,
                                   double eta, std::size_t max_iters = 100'000);

}  // namespace latdesign
