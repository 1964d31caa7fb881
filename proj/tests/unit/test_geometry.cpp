#include <algorithm>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "ztopo/geometry.hpp"

using namespace ztopo;

namespace {

std::set<std::tuple<long, long>> quantized(const std::vector<Vec3>& pts) {
  std::set<std::tuple<long, long>> out;
  for (const Vec3& p : pts) out.emplace(std::lround(p.x() * 1e9), std::lround(p.y() * 1e9));
  return out;
}

}  // namespace

TEST(BuildChain, SymmetricFourAtoms) {
  const ChainGeometry g = build_chain(4, 0.3);
  ASSERT_EQ(g.positions.size(), 4u);
  const double expected[4][2] = {{0.0, 0.0}, {0.15, 0.15}, {0.3, 0.0}, {0.45, 0.15}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(g.positions[i].x(), expected[i][0], 1e-15);
    EXPECT_NEAR(g.positions[i].y(), expected[i][1], 1e-15);
    EXPECT_EQ(g.positions[i].z(), 0.0);
  }
}

TEST(BuildChain, FiftyAtomsExtent) {
  const ChainGeometry g = build_chain(50, 0.3);
  EXPECT_EQ(g.positions.size(), 50u);
  EXPECT_EQ(g.n_cells(), 25);
  double max_a = 0.0;
  for (int i = 0; i < 50; i += 2) max_a = std::max(max_a, g.positions[i].x());
  EXPECT_NEAR(max_a, 24 * 0.3, 1e-12);
}

TEST(BuildChain, SublatticeSpacingIsA) {
  const ChainGeometry g = build_chain(20, 0.35, 0.2, -0.1);
  for (int i = 2; i < 20; ++i) {
    EXPECT_NEAR(g.positions[i].x() - g.positions[i - 2].x(), 0.35, 1e-14);
    EXPECT_DOUBLE_EQ(g.positions[i].y(), g.positions[i - 2].y());
  }
}

TEST(BuildChain, ShiftMovesOnlyB) {
  const ChainGeometry g0 = build_chain(6, 0.3);
  const ChainGeometry g = build_chain(6, 0.3, 0.1, -0.2);
  for (int i = 0; i < 6; ++i) {
    const Vec3 d = g.positions[i] - g0.positions[i];
    if (i % 2 == 0) {
      EXPECT_EQ(d.norm(), 0.0);
    } else {
      EXPECT_NEAR(d.x(), 0.03, 1e-15);
      EXPECT_NEAR(d.y(), -0.06, 1e-15);
    }
  }
}

TEST(BuildChain, CoincidenceDetected) {
  EXPECT_THROW(build_chain(4, 0.3, -0.5, -0.5), CoincidentAtoms);
  EXPECT_THROW(build_chain(4, 0.3, 0.5, -0.5), CoincidentAtoms);
  // B on the A row, midway between two A atoms
  const ChainGeometry g = build_chain(4, 0.3, 0.0, -0.5);
  EXPECT_NEAR(g.positions[1].x(), 0.15, 1e-15);
  EXPECT_NEAR(g.positions[1].y(), 0.0, 1e-15);
  EXPECT_FALSE(lattice_has_coincidence(0.3, 0.0, -0.5));
}

TEST(BuildChain, RejectsBadInput) {
  EXPECT_THROW(build_chain(5, 0.3), InvalidGeometry);
  EXPECT_THROW(build_chain(0, 0.3), InvalidGeometry);
  EXPECT_THROW(build_chain(4, 0.0), InvalidGeometry);
  EXPECT_THROW(build_chain(4, -0.1), InvalidGeometry);
  EXPECT_THROW(build_chain(4, 0.3, std::nan(""), 0.0), InvalidGeometry);
}

TEST(BuildChain, Deterministic) {
  const ChainGeometry a = build_chain(50, 0.35, 0.13, -0.27);
  const ChainGeometry b = build_chain(50, 0.35, 0.13, -0.27);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.positions[i], b.positions[i]);
}

TEST(BuildChain, GlideSymmetry) {
  // translate by a/2 along x and reflect y -> a/2 - y
  const double a = 0.3;
  const ChainGeometry g = build_chain(40, a);
  std::vector<Vec3> image;
  for (const Vec3& p : g.positions) image.emplace_back(p.x() + a / 2, a / 2 - p.y(), 0.0);
  const auto original = quantized(g.positions);
  const auto mapped = quantized(image);
  // all but the last image atom lie on the chain
  int outside = 0;
  for (const auto& q : mapped) outside += original.count(q) == 0;
  EXPECT_EQ(outside, 1);
}

TEST(BuildChain, SublatticeIndexing) {
  EXPECT_EQ(ChainGeometry::sublattice(0), Sublattice::A);
  EXPECT_EQ(ChainGeometry::sublattice(1), Sublattice::B);
  EXPECT_EQ(ChainGeometry::cell(7), 3);
}

TEST(CanonicalizePhi, Examples) {
  EXPECT_NEAR(canonicalize_phi(3 * pi / 4).phi, -pi / 4, 1e-15);
  EXPECT_EQ(canonicalize_phi(pi / 2).phi, pi / 2);
  EXPECT_NEAR(canonicalize_phi(-pi / 2).phi, pi / 2, 1e-15);
  EXPECT_NEAR(canonicalize_phi(0.3 + 5 * pi).phi, 0.3, 1e-13);
  EXPECT_EQ(canonicalize_phi(0.0).phi, 0.0);
}

TEST(CanonicalizePhi, RangeProperty) {
  for (double phi = -10.0; phi <= 10.0; phi += 0.0137) {
    const double c = canonicalize_phi(phi).phi;
    EXPECT_GT(c, -pi / 2);
    EXPECT_LE(c, pi / 2);
    const double turns = (phi - c) / pi;
    EXPECT_NEAR(turns, std::round(turns), 1e-12);
  }
}

TEST(CanonicalizePhi, NonFinite) {
  EXPECT_THROW(canonicalize_phi(std::numeric_limits<double>::infinity()), InvalidAngle);
  EXPECT_THROW(canonicalize_phi(std::nan("")), InvalidAngle);
}

TEST(ModelParams, Wavenumber) {
  ModelParams p;
  EXPECT_DOUBLE_EQ(p.k0(), two_pi);
  EXPECT_NO_THROW(p.validate());
}
