#include <gtest/gtest.h>

#include <random>

#include "latdesign/errors.hpp"
#include "latdesign/fold_oracle.hpp"
#include "oracles.hpp"

using namespace latdesign;

namespace {

Sequence shuffled(const Composition& comp, std::mt19937_64& rng) {
  Sequence s = first_sequence(comp);
  std::shuffle(s.mutable_types().begin(), s.mutable_types().end(), rng);
  return s;
}

}  // namespace

TEST(Fold, SpectrumMatchesDirectEnergies) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const auto e = ground_truth_matrix(3);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = shuffled({{5, 5, 6}}, rng);
    const auto fr = fold(s, ensemble, e, 3.0);
    ASSERT_EQ(fr.spectrum.size(), ensemble.size());
    std::vector<double> direct;
    for (const auto& c : ensemble.conformations()) direct.push_back(oracle::energy(c, s, e));
    for (std::size_t r = 0; r < fr.spectrum.size(); ++r) {
      const auto& entry = fr.spectrum[r];
      EXPECT_NEAR(entry.energy, direct[entry.index], 1e-12);
      EXPECT_EQ(fr.energy_of(entry.index), entry.energy);
      if (r > 0) {
        const auto& prev = fr.spectrum[r - 1];
        EXPECT_TRUE(prev.energy < entry.energy || (prev.energy == entry.energy && prev.index < entry.index));
      }
    }
    EXPECT_NEAR(fr.p_native, oracle::boltzmann(direct, fr.native(), 3.0), 1e-12);
  }
}

TEST(Fold, FoldableMeansUniqueGroundStateAboveThreshold) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const auto e = ground_truth_matrix(3);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = shuffled({{5, 5, 6}}, rng);
    const auto fr = fold(s, ensemble, e, 3.0, 0.8);
    ASSERT_FALSE(fr.ground_states.empty());
    EXPECT_TRUE(std::is_sorted(fr.ground_states.begin(), fr.ground_states.end()));
    for (std::size_t g : fr.ground_states) {
      EXPECT_LE(std::abs(fr.energy_of(g) - fr.spectrum.front().energy), kDegeneracyTolerance);
    }
    EXPECT_EQ(fr.foldable, fr.ground_states.size() == 1 && fr.p_native >= 0.8);
    EXPECT_EQ(fr.foldable, is_designing(s, fr.native(), ensemble.contact_maps(), e, 3.0, 0.8));
  }
}

TEST(Fold, EngineIsIndependentOfEnsembleOrder) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  std::vector<ContactMap> reversed(ensemble.contact_maps().rbegin(), ensemble.contact_maps().rend());
  const FoldingEngine forward(ensemble, ground_truth_matrix(3));
  const FoldingEngine backward(reversed, ground_truth_matrix(3));
  std::mt19937_64 rng(13);
  std::vector<double> a, b, scratch;
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = shuffled({{5, 5, 6}}, rng);
    forward.energies(s.types(), a, scratch);
    backward.energies(s.types(), b, scratch);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[a.size() - 1 - k]);
  }
}

TEST(Fold, CompetitorsAreLowerOrEqualStructures) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const auto e = ground_truth_matrix(3);
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = shuffled({{5, 5, 6}}, rng);
    const auto fr = fold(s, ensemble, e, 3.0);
    const std::size_t target = rng() % ensemble.size();
    const auto comp = competitors(fr, target, 10);
    EXPECT_LE(comp.size(), 10u);
    std::size_t expected = 0;
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      if (k != target && fr.energy_of(k) <= fr.energy_of(target)) ++expected;
    }
    EXPECT_EQ(comp.size(), std::min<std::size_t>(expected, 10));
    for (std::size_t r = 0; r < comp.size(); ++r) {
      EXPECT_NE(comp[r], target);
      EXPECT_LE(fr.energy_of(comp[r]), fr.energy_of(target));
      if (r > 0) EXPECT_LE(fr.energy_of(comp[r - 1]), fr.energy_of(comp[r]));
    }
  }
}

TEST(Fold, NativeTargetHasNoStrictCompetitorsWhenFoldable) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const auto s = Sequence::parse("1,1,2,3,3,2,1,1,2,3,3,2,1,2,3,3");
  const auto fr = fold(s, ensemble, ground_truth_matrix(3), 3.0);
  if (fr.ground_states.size() == 1) EXPECT_TRUE(competitors(fr, fr.native()).empty());
}

TEST(Census, MatchesPerSequenceFolding) {
  const auto ensemble = CompactEnsemble::enumerate(3);
  const Composition comp{{3, 3, 3}};
  const auto e = ground_truth_matrix(3);
  const auto census = designability_census(ensemble, comp, e, 3.0, 0.8);
  EXPECT_EQ(census.total_sequences, 1680u);
  std::vector<std::uint64_t> unique(ensemble.size(), 0), designing(ensemble.size(), 0);
  std::vector<std::vector<Sequence>> lists(ensemble.size());
  for (std::uint64_t r = 0; r < 1680; ++r) {
    const auto s = nth_sequence(comp, r);
    const auto fr = fold(s, ensemble, e, 3.0, 0.8);
    if (fr.ground_states.size() != 1) continue;
    ++unique[fr.native()];
    if (fr.foldable) {
      ++designing[fr.native()];
      lists[fr.native()].push_back(s);
    }
  }
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    EXPECT_EQ(census.records[k].structure, k);
    EXPECT_EQ(census.records[k].unique_ground_state, unique[k]);
    EXPECT_EQ(census.records[k].designing, designing[k]);
    EXPECT_EQ(census.designing[k], lists[k]);
  }
  const auto best = std::max_element(designing.begin(), designing.end()) - designing.begin();
  EXPECT_EQ(census.most_designable(), static_cast<std::size_t>(best));
}

TEST(Census, ThreadCountDoesNotChangeResult) {
  const auto ensemble = CompactEnsemble::enumerate(3);
  const Composition comp{{2, 3, 4}};
  CensusOptions one;
  one.threads = 1;
  CensusOptions four;
  four.threads = 4;
  const auto a = designability_census(ensemble, comp, ground_truth_matrix(3), 3.0, 0.8, one);
  const auto b = designability_census(ensemble, comp, ground_truth_matrix(3), 3.0, 0.8, four);
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    EXPECT_EQ(a.records[k].designing, b.records[k].designing);
    EXPECT_EQ(a.records[k].unique_ground_state, b.records[k].unique_ground_state);
    EXPECT_EQ(a.designing[k], b.designing[k]);
  }
}

TEST(Census, EnforcesSequenceCap) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  CensusOptions opts;
  opts.max_sequences = 1000;
  EXPECT_THROW(designability_census(ensemble, {{5, 5, 6}}, ground_truth_matrix(3), 3.0, 0.8, opts),
               ResourceLimitError);
  EXPECT_EQ(checked_sequence_count({{3, 3, 3}}, 1680), 1680u);
  EXPECT_THROW(checked_sequence_count({{3, 3, 3}}, 1679), ResourceLimitError);
}
