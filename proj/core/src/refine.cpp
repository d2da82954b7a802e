#include "latdesign/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "latdesign/errors.hpp"

namespace latdesign {

std::size_t epsilon_size(int alphabet_size) {
  const auto d = static_cast<std::size_t>(alphabet_size);
  return d * (d + 1) / 2;
}

std::size_t pair_feature_index(int m, int n, int alphabet_size) {
  if (m > n) std::swap(m, n);
  const auto d = static_cast<std::size_t>(alphabet_size);
  const auto mm = static_cast<std::size_t>(m);
  // Rows 0..m-1 hold d, d-1, ... entries.
  return mm * d - mm * (mm - 1) / 2 + static_cast<std::size_t>(n - m);
}

EpsilonVector flatten(const EnergyMatrix& e) {
  const int d = e.alphabet_size();
  EpsilonVector out;
  out.reserve(epsilon_size(d));
  for (int m = 0; m < d; ++m) {
    for (int n = m; n < d; ++n) out.push_back(e(m, n));
  }
  return out;
}

EnergyMatrix unflatten(std::span<const double> eps, int alphabet_size) {
  check_alphabet(alphabet_size);
  if (eps.size() != epsilon_size(alphabet_size)) throw InvalidArgument("epsilon vector has the wrong length");
  const auto d = static_cast<std::size_t>(alphabet_size);
  std::vector<double> entries(d * d);
  std::size_t k = 0;
  for (std::size_t m = 0; m < d; ++m) {
    for (std::size_t n = m; n < d; ++n, ++k) {
      entries[m * d + n] = eps[k];
      entries[n * d + m] = eps[k];
    }
  }
  return EnergyMatrix(alphabet_size, std::move(entries));
}

EnergyMatrix random_energy_matrix(int alphabet_size, std::uint64_t seed) {
  check_alphabet(alphabet_size);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  EpsilonVector eps(epsilon_size(alphabet_size));
  for (auto& v : eps) v = u(rng);
  return unflatten(eps, alphabet_size);
}

std::vector<double> contact_type_vector(const ContactMap& c, const Sequence& s, int alphabet_size) {
  if (c.size() != s.size()) throw InvalidArgument("contact map and sequence lengths differ");
  std::vector<double> out(epsilon_size(alphabet_size), 0.0);
  for (const auto& [i, j] : c.pairs()) {
    if (s[i] >= alphabet_size || s[j] >= alphabet_size) throw InvalidArgument("residue type outside alphabet");
    out[pair_feature_index(s[i], s[j], alphabet_size)] += 1.0;
  }
  return out;
}

double min_gap(double p_fold, double beta) {
  if (!(p_fold > 0.5) || !(p_fold < 1.0)) throw InvalidArgument("min_gap needs 0.5 < p_fold < 1");
  if (!(beta > 0.0)) throw InvalidArgument("min_gap needs beta > 0");
  return std::log(p_fold / (1.0 - p_fold)) / beta;
}

double eta_schedule(std::size_t cycle, double eta0) {
  if (!(eta0 > 0.0)) throw InvalidArgument("eta0 must be positive");
  return eta0 / (1.0 + 3.0 * static_cast<double>(cycle));
}

double default_eta0(int alphabet_size) {
  switch (alphabet_size) {
    case 3: return 0.325;
    case 4: return 0.288;
    case 5: return 0.263;
    default: return 0.3;
  }
}

double LinearConstraint::margin(std::span<const double> eps) const {
  double total = c;
  for (std::size_t k = 0; k < x.size(); ++k) total += eps[k] * x[k];
  return total;
}

std::vector<LinearConstraint> build_constraints(std::span<const FoldedSequence> history, std::size_t target,
                                                std::span<const ContactMap> ensemble, int alphabet_size,
                                                const ConstraintOptions& opts) {
  if (target >= ensemble.size()) throw InvalidArgument("target index outside the ensemble");
  const double gap = min_gap(opts.p_fold, opts.beta);
  std::vector<LinearConstraint> out;
  auto difference = [&](const std::vector<double>& a, const std::vector<double>& b, double c) {
    LinearConstraint lc{std::vector<double>(a.size()), c};
    for (std::size_t k = 0; k < a.size(); ++k) lc.x[k] = a[k] - b[k];
    out.push_back(std::move(lc));
  };

  for (const auto& h : history) {
    const auto n_target = contact_type_vector(ensemble[target], h.sequence, alphabet_size);
    for (std::size_t i : competitors(h.fold, target, opts.n_max)) {
      difference(n_target, contact_type_vector(ensemble[i], h.sequence, alphabet_size), 0.0);
    }
    if (!h.fold.foldable) continue;
    const auto n_ground = contact_type_vector(ensemble[h.fold.native()], h.sequence, alphabet_size);
    const std::size_t last = std::min(h.fold.spectrum.size(), opts.n_max + 1);
    for (std::size_t r = 1; r < last; ++r) {
      const auto n_excited = contact_type_vector(ensemble[h.fold.spectrum[r].index], h.sequence, alphabet_size);
      difference(n_excited, n_ground, -gap);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double total_violation(std::span<const LinearConstraint> constraints, std::span<const double> eps) {
  double total = 0.0;
  for (const auto& lc : constraints) total += std::max(0.0, -lc.margin(eps));
  return total;
}

PerceptronResult perceptron_refine(const EpsilonVector& eps, std::span<const LinearConstraint> constraints,
                                   double eta, std::size_t max_iters) {
  if (!(eta > 0.0)) throw InvalidArgument("perceptron step size must be positive");
  if (max_iters == 0) throw InvalidArgument("perceptron needs max_iters >= 1");
  for (const auto& lc : constraints) {
    if (lc.x.size() != eps.size()) throw InvalidArgument("constraint and epsilon lengths differ");
  }
  PerceptronResult best{eps, 0, constraints.empty(), 0.0};
  if (constraints.empty()) return best;

  EpsilonVector current = eps;
  best.violation = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0;; ++iter) {
    std::size_t worst = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double violation = 0.0;
    for (std::size_t k = 0; k < constraints.size(); ++k) {
      const double m = constraints[k].margin(current);
      if (m < worst_margin) {
        worst_margin = m;
        worst = k;
      }
      if (m < 0.0) violation -= m;
    }
    if (violation < best.violation) {
      best.eps = current;
      best.violation = violation;
      best.updates = iter;
    }
    if (worst_margin >= 0.0) {
      best.satisfied = true;
      return best;
    }
    if (iter == max_iters) return best;
    const auto& x = constraints[worst].x;
    for (std::size_t k = 0; k < current.size(); ++k) current[k] += eta * x[k];
  }
}

}  // namespace latdesign
