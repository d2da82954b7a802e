#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "latdesign/errors.hpp"
#include "latdesign/lattice.hpp"
#include "oracles.hpp"

using namespace latdesign;

namespace {

std::vector<Site> sites_of(std::initializer_list<std::pair<int, int>> xy) {
  std::vector<Site> out;
  for (auto [x, y] : xy) out.push_back({x, y});
  return out;
}

}  // namespace

TEST(Lattice, DirectedPathCountsMatchBruteForce) {
  for (int side = 2; side <= 5; ++side) {
    EXPECT_EQ(enumerate_directed_paths(side).size(), oracle::count_directed_paths(side)) << "side " << side;
  }
}

TEST(Lattice, DirectedPathCountsFrozen) {
  const std::size_t expected[] = {8, 40, 552, 8648};
  for (int side = 2; side <= 5; ++side) EXPECT_EQ(enumerate_directed_paths(side).size(), expected[side - 2]);
}

TEST(Lattice, PointReducedCountsFrozen) {
  const std::size_t expected[] = {1, 5, 69, 1081};
  for (int side = 2; side <= 5; ++side) EXPECT_EQ(enumerate_compact_conformations(side).size(), expected[side - 2]);
}

TEST(Lattice, PointReducedCountSixBySix) { EXPECT_EQ(enumerate_compact_conformations(6).size(), 57337u); }

TEST(Lattice, ReversalReducedCountsFrozen) {
  EnumerationOptions opts;
  opts.symmetry = Symmetry::point_and_reversal;
  const std::size_t expected[] = {1, 3, 38, 549};
  for (int side = 2; side <= 5; ++side) {
    EXPECT_EQ(enumerate_compact_conformations(side, opts).size(), expected[side - 2]);
  }
}

TEST(Lattice, OrbitsPartitionTheDirectedPaths) {
  for (int side = 2; side <= 4; ++side) {
    std::set<Conformation> images;
    for (const auto& c : enumerate_compact_conformations(side)) {
      for (int op = 0; op < 8; ++op) images.insert(apply_symmetry(c, op, false));
    }
    const auto directed = enumerate_directed_paths(side);
    EXPECT_EQ(images.size(), directed.size());
    for (const auto& d : directed) EXPECT_TRUE(images.count(d));
  }
}

TEST(Lattice, RepresentativesAreCanonicalSortedAndDistinct) {
  const auto confs = enumerate_compact_conformations(4);
  EXPECT_TRUE(std::is_sorted(confs.begin(), confs.end()));
  EXPECT_EQ(std::adjacent_find(confs.begin(), confs.end()), confs.end());
  for (const auto& c : confs) {
    EXPECT_TRUE(is_compact_chain(c.sites(), 4));
    EXPECT_EQ(canonical_form(c, Symmetry::point), c);
  }
}

TEST(Lattice, CanonicalFormIsInvariantUnderAllSixteenMaps) {
  for (const auto& c : enumerate_compact_conformations(4)) {
    const auto canon = canonical_form(c);
    for (int op = 0; op < 8; ++op) {
      for (bool rev : {false, true}) EXPECT_EQ(canonical_form(apply_symmetry(c, op, rev)), canon);
    }
  }
}

TEST(Lattice, ContactCountIsFixedBySide) {
  for (int side = 2; side <= 5; ++side) {
    for (const auto& c : enumerate_compact_conformations(side)) {
      EXPECT_EQ(ContactMap(c).num_contacts(), static_cast<std::size_t>((side - 1) * (side - 1)));
    }
  }
}

TEST(Lattice, ContactMapMatchesDefinition) {
  for (const auto& c : enumerate_compact_conformations(4)) {
    const ContactMap map(c);
    const auto ref = oracle::contact_matrix(c);
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) {
        EXPECT_EQ(map(i, j), ref[i][j] != 0);
        EXPECT_EQ(map(i, j), map(j, i));
      }
      if (i + 1 < c.size()) EXPECT_FALSE(map(i, i + 1));
    }
    for (const auto& [i, j] : map.pairs()) EXPECT_LT(i, j);
    EXPECT_TRUE(std::is_sorted(map.pairs().begin(), map.pairs().end()));
  }
}

TEST(Lattice, PointSymmetryPreservesContactMaps) {
  for (const auto& c : enumerate_compact_conformations(4)) {
    const ContactMap base(c);
    for (int op = 0; op < 8; ++op) EXPECT_EQ(ContactMap(apply_symmetry(c, op, false)).pairs(), base.pairs());
  }
}

TEST(Lattice, AverageContactMapMatchesDirectMean) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  const auto ref = oracle::mean_contacts(ensemble.conformations());
  double upper = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) {
      EXPECT_NEAR(ensemble.average()(i, j), ref[i][j], 1e-15);
      EXPECT_GE(ensemble.average()(i, j), 0.0);
      EXPECT_LE(ensemble.average()(i, j), 1.0);
      if (i < j) upper += ensemble.average()(i, j);
    }
  }
  EXPECT_NEAR(upper, 9.0, 1e-12);
}

TEST(Lattice, FindLocatesEverySymmetricImage) {
  const auto ensemble = CompactEnsemble::enumerate(4);
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    for (int op = 0; op < 8; ++op) {
      EXPECT_EQ(ensemble.find(apply_symmetry(ensemble.conformation(k), op, false)), static_cast<std::ptrdiff_t>(k));
    }
  }
  const auto small = CompactEnsemble::enumerate(3);
  EXPECT_EQ(small.find(serpentine(4)), -1);
}

TEST(Lattice, RejectsInvalidChains) {
  EXPECT_THROW(Conformation(sites_of({{0, 0}, {1, 1}, {1, 0}, {0, 1}})), InvalidArgument);  // diagonal step
  EXPECT_THROW(Conformation(sites_of({{0, 0}, {1, 0}, {0, 0}, {0, 1}})), InvalidArgument);  // revisit
  EXPECT_THROW(Conformation(sites_of({{0, 0}, {1, 0}, {2, 0}, {3, 0}})), InvalidArgument);  // off grid
  EXPECT_THROW(Conformation(sites_of({{0, 0}, {1, 0}, {1, 1}})), InvalidArgument);          // not square
  EXPECT_NO_THROW(Conformation(sites_of({{0, 0}, {1, 0}, {1, 1}, {0, 1}})));
}

TEST(Lattice, EnumerationGuardsSide) {
  EXPECT_THROW(enumerate_compact_conformations(1), InvalidArgument);
  EXPECT_THROW(enumerate_compact_conformations(7), ResourceLimitError);
}

TEST(Lattice, ReversalIsAnInvolution) {
  for (const auto& c : enumerate_compact_conformations(4)) EXPECT_EQ(c.reversed().reversed(), c);
}

TEST(Lattice, TextRoundTrip) {
  const auto confs = enumerate_compact_conformations(3);
  std::stringstream io;
  io << "# header comment\n\n";
  write_conformations(io, confs);
  EXPECT_EQ(read_conformations(io), confs);
}

TEST(Lattice, ReadRejectsMalformedLines) {
  std::istringstream bad("0,0 1,0 1,1 2,2\n");
  EXPECT_THROW(read_conformations(bad), std::exception);
}

TEST(Lattice, BackbiteSamplesAreCompactAndReproducible) {
  const auto a = sample_compact_conformations(9, 20, 42, 5);
  const auto b = sample_compact_conformations(9, 20, 42, 5);
  EXPECT_EQ(a, b);
  for (const auto& c : a) EXPECT_TRUE(is_compact_chain(c.sites(), 9));
  EXPECT_NE(a.front(), a.back());
}

TEST(Lattice, BackbiteReachesEveryThreeByThreeClass) {
  const auto ensemble = CompactEnsemble::enumerate(3);
  std::set<std::ptrdiff_t> seen;
  for (const auto& c : sample_compact_conformations(3, 400, 3, 2)) seen.insert(ensemble.find(c));
  EXPECT_EQ(seen.size(), ensemble.size());
  EXPECT_FALSE(seen.count(-1));
}
