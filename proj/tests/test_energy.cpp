#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "latdesign/energy.hpp"
#include "latdesign/errors.hpp"
#include "latdesign/lattice.hpp"
#include "oracles.hpp"

using namespace latdesign;

namespace {

Sequence shuffled(const Composition& comp, std::mt19937_64& rng) {
  Sequence s = first_sequence(comp);
  std::shuffle(s.mutable_types().begin(), s.mutable_types().end(), rng);
  return s;
}

EnergyMatrix random_symmetric(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> e(static_cast<std::size_t>(d * d));
  for (int m = 0; m < d; ++m) {
    for (int n = m; n < d; ++n) e[m * d + n] = e[n * d + m] = u(rng);
  }
  return EnergyMatrix(d, e);
}

}  // namespace

TEST(Sequence, LabelsAreOneBased) {
  const auto s = Sequence::parse("1,3,2,2");
  EXPECT_EQ(s[0], 0);
  EXPECT_EQ(s[1], 2);
  EXPECT_EQ(s.to_string(), "1,3,2,2");
  EXPECT_EQ(Sequence::parse("1 3 2 2"), s);
  EXPECT_EQ(s.reversed().to_string(), "2,2,3,1");
  EXPECT_THROW(Sequence::parse("0,1"), InvalidArgument);
  EXPECT_THROW(Sequence::parse("1,x"), std::exception);
}

TEST(Composition, ParseAndCount) {
  const auto comp = Composition::parse("5,5,6");
  EXPECT_EQ(comp.total(), 16);
  EXPECT_EQ(comp.to_string(), "5,5,6");
  EXPECT_EQ(composition_of(Sequence::parse("1,2,2,3"), 3), (Composition{{1, 2, 1}}));
  EXPECT_THROW(Composition::parse("16"), InvalidArgument);
}

TEST(Composition, MultinomialMatchesPermutationCount) {
  for (const Composition& comp : {Composition{{3, 3, 3}}, Composition{{2, 1, 4}}, Composition{{1, 1, 1, 2}},
                                  Composition{{0, 4, 2}}}) {
    EXPECT_EQ(*multinomial_count(comp), oracle::count_permutations(first_sequence(comp).mutable_types()));
  }
}

TEST(Composition, MultinomialFrozen) {
  EXPECT_EQ(*multinomial_count({{3, 3, 3}}), 1680u);
  EXPECT_EQ(*multinomial_count({{5, 5, 6}}), 2018016u);
  EXPECT_EQ(*multinomial_count({{5, 4, 2, 5}}), 30270240u);
  EXPECT_EQ(*multinomial_count({{3, 3, 2, 4, 4}}), 504504000u);
  EXPECT_EQ(*multinomial_count({{16, 0}}), 1u);
  EXPECT_FALSE(multinomial_count({{40, 40, 40}}).has_value());
}

TEST(Composition, RankingIsLexicographicAndInvertible) {
  const Composition comp{{2, 2, 1}};
  Sequence s = first_sequence(comp);
  std::uint64_t r = 0;
  do {
    EXPECT_EQ(nth_sequence(comp, r), s);
    EXPECT_EQ(sequence_rank(comp, s), r);
    ++r;
  } while (std::next_permutation(s.mutable_types().begin(), s.mutable_types().end()));
  EXPECT_EQ(r, *multinomial_count(comp));
  EXPECT_THROW(nth_sequence(comp, r), InvalidArgument);
}

TEST(Composition, RankRoundTripOnLargeComposition) {
  const Composition comp{{5, 4, 2, 5}};
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto s = shuffled(comp, rng);
    EXPECT_EQ(nth_sequence(comp, sequence_rank(comp, s)), s);
  }
}

TEST(EnergyMatrix, GroundTruthValues) {
  const auto e3 = ground_truth_matrix(3);
  EXPECT_DOUBLE_EQ(e3(0, 0), -0.35346);
  EXPECT_DOUBLE_EQ(e3(0, 1), 0.30399);
  EXPECT_DOUBLE_EQ(e3(1, 2), -0.30167);
  EXPECT_DOUBLE_EQ(e3(2, 2), 0.34102);
  const auto e4 = ground_truth_matrix(4);
  EXPECT_DOUBLE_EQ(e4(1, 3), -0.5146);
  EXPECT_DOUBLE_EQ(e4(3, 3), 0.34976);
  const auto e5 = ground_truth_matrix(5);
  EXPECT_DOUBLE_EQ(e5(3, 3), -0.38521);
  EXPECT_DOUBLE_EQ(e5(4, 4), -0.32999);
  for (int d : {3, 4, 5}) {
    const auto e = ground_truth_matrix(d);
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) EXPECT_EQ(e(m, n), e(n, m));
    }
  }
  EXPECT_THROW(ground_truth_matrix(6), InvalidArgument);
}

TEST(EnergyMatrix, RejectsAsymmetryAndSymmetrizesOnLoad) {
  EXPECT_THROW(EnergyMatrix(2, {0.0, 1.0, 2.0, 0.0}), InvalidArgument);
  std::istringstream in("0 1\n2 0\n");
  const auto load = read_energy_matrix(in);
  EXPECT_TRUE(load.warned());
  EXPECT_DOUBLE_EQ(load.max_asymmetry, 1.0);
  EXPECT_DOUBLE_EQ(load.matrix(0, 1), 1.5);
  std::istringstream ragged("0 1\n1\n");
  EXPECT_THROW(read_energy_matrix(ragged), std::exception);
}

TEST(EnergyMatrix, WriteReadIsExact) {
  std::mt19937_64 rng(9);
  const auto e = random_symmetric(4, rng);
  std::stringstream io;
  write_energy_matrix(io, e);
  const auto load = read_energy_matrix(io);
  EXPECT_FALSE(load.warned());
  EXPECT_EQ(load.matrix, e);
}

TEST(Energy, ContactEnergyMatchesDirectSum) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  std::mt19937_64 rng(1);
  const auto e = random_symmetric(3, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = shuffled({{5, 5, 6}}, rng);
    const std::size_t k = rng() % ensemble.size();
    EXPECT_NEAR(contact_energy(ensemble.contact_map(k), s, e), oracle::energy(ensemble.conformation(k), s, e), 1e-12);
  }
}

TEST(Energy, DesignScoreMatchesDirectDefinition) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const auto avg = oracle::mean_contacts(ensemble.conformations());
  std::mt19937_64 rng(2);
  const auto e = ground_truth_matrix(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = shuffled({{5, 5, 6}}, rng);
    const std::size_t k = rng() % ensemble.size();
    const DeltaContactMap dc(ensemble.contact_map(k), ensemble.average());
    const double expected = oracle::design_score(ensemble.conformation(k), avg, s, e);
    EXPECT_NEAR(scoring_g(dc, s, e), expected, 1e-12);
    EXPECT_NEAR(contact_energy(ensemble.contact_map(k), s, e) - reference_energy(ensemble.average(), s, e), expected,
                1e-12);
    EXPECT_NEAR(ScoringFunction(dc, e)(s), expected, 1e-12);
  }
}

TEST(Energy, DeltaContactsSumToZero) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const DeltaContactMap dc(ensemble.contact_map(k), ensemble.average());
    double total = 0.0;
    for (const auto& entry : dc.nonzero()) {
      total += entry.value;
      EXPECT_LT(entry.i, entry.j);
      EXPECT_GE(std::abs(entry.value), 1e-12);
    }
    EXPECT_NEAR(total, 0.0, 1e-12);
  }
}

TEST(Energy, ScoreIgnoresConstantShiftOfMatrix) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const DeltaContactMap dc(ensemble.contact_map(5), ensemble.average());
  const auto e = ground_truth_matrix(3);
  std::vector<double> shifted(e.entries().begin(), e.entries().end());
  for (auto& v : shifted) v += 0.7;
  const EnergyMatrix e_shift(3, shifted);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = shuffled({{5, 5, 6}}, rng);
    EXPECT_NEAR(scoring_g(dc, s, e_shift), scoring_g(dc, s, e), 1e-12);
  }
  EXPECT_NEAR(scoring_g(dc, first_sequence({{5, 5, 6}}), EnergyMatrix::constant(3, 2.5)), 0.0, 1e-12);
}

TEST(Energy, SwapDeltaMatchesRecomputation) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const ScoringFunction g(DeltaContactMap(ensemble.contact_map(11), ensemble.average()), ground_truth_matrix(3));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = shuffled({{5, 5, 6}}, rng);
    const std::size_t i = rng() % 16;
    const std::size_t j = (i + 1 + rng() % 15) % 16;
    const double before = g(s);
    const double delta = g.swap_delta(s.types(), i, j);
    std::swap(s.mutable_types()[i], s.mutable_types()[j]);
    EXPECT_NEAR(g(s) - before, delta, 1e-12);
  }
}

TEST(Energy, BoltzmannMatchesDirectAndNormalizes) {
  const std::vector<double> energies{-1.0, -0.5, 0.3, 0.3, 2.0};
  double total = 0.0;
  for (std::size_t k = 0; k < energies.size(); ++k) {
    const double p = boltzmann_probability(energies, k, 3.0);
    EXPECT_NEAR(p, oracle::boltzmann(energies, k, 3.0), 1e-14);
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(Energy, BoltzmannIsStableForLargeEnergies) {
  const std::vector<double> energies{-5000.0, -4999.0, 1e4};
  const double p = boltzmann_probability(energies, 0, 3.0);
  EXPECT_TRUE(std::isfinite(p));
  EXPECT_NEAR(p, 1.0 / (1.0 + std::exp(-3.0)), 1e-14);
}

TEST(Energy, FoldProbabilityNormalizesOverEnsemble) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const auto s = Sequence::parse("1,2,3,1,2,3,1,2,3,1,2,3,1,2,3,3");
  double total = 0.0;
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    total += fold_probability(s, k, ensemble.contact_maps(), ground_truth_matrix(3), 3.0);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Energy, DegenerateGroundStateIsNotDesigning) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  // A homopolymer sees every structure at the same energy.
  const auto s = first_sequence({{16, 0, 0}});
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    EXPECT_FALSE(is_designing(s, k, ensemble.contact_maps(), ground_truth_matrix(3), 3.0, 0.0001));
  }
}
