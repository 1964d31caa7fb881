#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracle_values.hpp"
#include "ztopo/bloch.hpp"

using namespace ztopo;

TEST(BlochHamiltonian, MatchesDirectSumOracle) {
  for (const auto& c : oracle::bloch_cases) {
    const ChainGeometry g = build_chain(2, c.a, c.sx, c.sy);
    const BlochVector v = bloch_hamiltonian(g, c.phi, c.k, c.cutoff);
    EXPECT_NEAR(v.d0, c.d0, 1e-11);
    EXPECT_NEAR(v.d.x(), c.dx, 1e-11);
    EXPECT_NEAR(v.d.y(), c.dy, 1e-11);
    EXPECT_EQ(v.d.z(), 0.0);
  }
}

TEST(BlochHamiltonian, LatticeSumsAgreeWithDirectSum) {
  const ChainGeometry g = build_chain(2, 0.35, 0.2, -0.15);
  const BlochLatticeSums sums(g, 128, 700);
  for (int n : {0, 17, 63, 64, 100, 127}) {
    for (double phi : {-1.1, 0.0, 0.45}) {
      const BlochVector a = sums.at(n, phi);
      const BlochVector b = bloch_hamiltonian(g, phi, sums.k(n), 700);
      EXPECT_NEAR(a.d0, b.d0, 1e-11);
      EXPECT_NEAR(a.d.x(), b.d.x(), 1e-11);
      EXPECT_NEAR(a.d.y(), b.d.y(), 1e-11);
    }
  }
  EXPECT_NEAR(sums.k(127), pi / 0.35, 1e-12);
}

TEST(BlochHamiltonian, PiPeriodicAndTimeReversal) {
  const ChainGeometry g = build_chain(2, 0.3, 0.1, 0.2);
  const BlochVector v = bloch_hamiltonian(g, -0.4, 2.1, 1000);
  const BlochVector w = bloch_hamiltonian(g, -0.4 + pi, 2.1, 1000);
  const BlochVector m = bloch_hamiltonian(g, -0.4, -2.1, 1000);
  EXPECT_NEAR((v.d - w.d).norm(), 0.0, 1e-12);
  EXPECT_NEAR(v.d0, w.d0, 1e-12);
  EXPECT_NEAR(m.d0, v.d0, 1e-12);
  EXPECT_NEAR(m.d.x(), v.d.x(), 1e-12);
  EXPECT_NEAR(m.d.y(), -v.d.y(), 1e-12);
}

TEST(BlochHamiltonian, WrapsK) {
  const ChainGeometry g = build_chain(2, 0.3);
  const BlochVector v = bloch_hamiltonian(g, 0.2, 1.0 + two_pi / 0.3, 200);
  EXPECT_TRUE(v.k_wrapped);
  EXPECT_NEAR(v.k, 1.0, 1e-12);
  EXPECT_NEAR(wrap_k(-pi / 0.3, 0.3), pi / 0.3, 1e-12);
  EXPECT_NEAR(wrap_k(pi / 0.3, 0.3), pi / 0.3, 1e-12);
}

TEST(BlochHamiltonian, MatrixIsHermitianWithEigenvalues) {
  const ChainGeometry g = build_chain(2, 0.3);
  BlochVector v = bloch_hamiltonian(g, -0.7, 1.3, 300);
  v.d.z() = 0.25;
  const Eigen::Matrix2cd h = v.matrix();
  EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
  EXPECT_NEAR(es.eigenvalues()(0), v.omega_minus(), 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), v.omega_plus(), 1e-12);
}

TEST(BlochHamiltonian, NearestNeighbourTruncationIsSsh) {
  // f = t + t' e^{-ika} with t = Omega_AB(0), t' = Omega_AB(-1); the m = +1
  // term of the symmetric sum is subtracted
  const ChainGeometry g = build_chain(2, 0.3);
  const double phi = -pi / 4, k = 1.7;
  const BlochVector v = bloch_hamiltonian(g, phi, k, 1);
  const double c = std::cos(phi), s = std::sin(phi);
  const double t0 = detail::inter_components(g, 0, {}).project(c, s);
  const double tm = detail::inter_components(g, -1, {}).project(c, s);
  const double tp = detail::inter_components(g, 1, {}).project(c, s);
  const cplx f = t0 + tm * std::polar(1.0, k * 0.3) + tp * std::polar(1.0, -k * 0.3);
  EXPECT_NEAR(v.d.x(), f.real(), 1e-14);
  EXPECT_NEAR(v.d.y(), f.imag(), 1e-14);
  // for the symmetric chain only the nearest pair survives at leading order
  EXPECT_GT(std::abs(tm), 5.0 * std::abs(tp));
}

TEST(BlochHamiltonian, InvalidCutoffAndGeometry) {
  const ChainGeometry g = build_chain(2, 0.3);
  EXPECT_THROW(bloch_hamiltonian(g, 0.1, 0.0, 0), InvalidCutoff);
  ChainGeometry bad = g;
  bad.shift_x = -0.5;
  bad.shift_y = -0.5;
  EXPECT_THROW(bloch_hamiltonian(bad, 0.1, 0.0, 10), CoincidentAtoms);
}

TEST(ConvergeBloch, StableBetweenDoublings) {
  const ChainGeometry g = build_chain(2, 0.3);
  const double k = pi / (2 * 0.3);
  const BlochVector v = converge_bloch(g, -pi / 4, k, 1e-5);
  EXPECT_TRUE(v.converged);
  const BlochVector w = bloch_hamiltonian(g, -pi / 4, k, 2 * v.cutoff_cells);
  EXPECT_LT((v.d - w.d).norm(), 1e-5);
  EXPECT_LT(std::abs(v.d0 - w.d0), 1e-5);
}

TEST(ConvergeBloch, ReportsCapWithoutConvergence) {
  // the far-field tail falls off as 1/M, so 1e-8 is out of reach below 2^20 cells
  const BlochVector v = converge_bloch(build_chain(2, 0.3), -pi / 4, pi / (2 * 0.3), 1e-8);
  EXPECT_FALSE(v.converged);
  EXPECT_EQ(v.cutoff_cells, converge_cap_cells);
}

TEST(ConvergeBloch, SlowestInsideLightCone) {
  const ChainGeometry g = build_chain(2, 0.3);
  const BlochVector inside = converge_bloch(g, -pi / 4, 0.5 * two_pi, 1e-6);
  const BlochVector outside = converge_bloch(g, -pi / 4, 0.9 * pi / 0.3, 1e-6);
  EXPECT_TRUE(outside.converged);
  EXPECT_GE(inside.cutoff_cells, outside.cutoff_cells);
}

TEST(ConvergeBloch, GapClosesAtDiracPoints) {
  // min |d_xy| over k shrinks with the cutoff at phi = 0 and pi/2
  const ChainGeometry g = build_chain(2, 0.3);
  for (double phi : {0.0, pi / 2}) {
    double previous = std::numeric_limits<double>::infinity();
    for (int cutoff : {256, 1024, 4096}) {
      const WindingResult w = winding_from_sums(BlochLatticeSums(g, 1024, cutoff), phi);
      EXPECT_LT(w.min_dxy, previous) << "phi=" << phi << " cutoff=" << cutoff;
      previous = w.min_dxy;
    }
    EXPECT_LT(previous, 1e-3) << "phi=" << phi;
  }
}

TEST(WindingNumber, OracleCases) {
  for (const auto& c : oracle::winding_cases) {
    const ChainGeometry g = build_chain(2, c.a, c.sx, c.sy);
    const WindingResult w = winding_number(g, c.phi);
    EXPECT_TRUE(w.well_defined) << c.a << " " << c.sx << " " << c.sy << " " << c.phi;
    EXPECT_EQ(w.nu, c.nu) << c.a << " " << c.sx << " " << c.sy << " " << c.phi;
    EXPECT_NEAR(w.winding, c.nu, 1e-9);
  }
}

TEST(WindingNumber, FinerGridAgrees) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> phi(-pi / 2, pi / 2), shift(-0.45, 0.45);
  int compared = 0;
  for (int i = 0; i < 20; ++i) {
    const ChainGeometry g = build_chain(2, 0.35, shift(rng), shift(rng));
    const double p = phi(rng);
    const WindingResult coarse = winding_number(g, p, 1024);
    const WindingResult fine = winding_number(g, p, 4096);
    if (!coarse.well_defined) continue;
    ++compared;
    EXPECT_EQ(coarse.nu, fine.nu);
  }
  EXPECT_GT(compared, 10);
}

TEST(WindingNumber, IndependentOfD0) {
  // d0 never enters the winding; compare against the loop of f alone built
  // from the direct sum
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> phi(-pi / 2, pi / 2), shift(-0.45, 0.45);
  for (int i = 0; i < 20; ++i) {
    const ChainGeometry g = build_chain(2, 0.3, shift(rng), shift(rng));
    const double p = phi(rng);
    const BlochLatticeSums sums(g, 256, 512);
    const WindingResult w = winding_from_sums(sums, p);
    double total = 0.0;
    for (int n = 0; n < 256; ++n) {
      const BlochVector a = bloch_hamiltonian(g, p, sums.k(n), 512);
      const BlochVector b = bloch_hamiltonian(g, p, sums.k((n + 1) % 256), 512);
      total += std::arg(cplx(b.d.x(), b.d.y()) / cplx(a.d.x(), a.d.y()));
    }
    EXPECT_NEAR(total / two_pi, w.winding, 1e-8);
  }
}

TEST(WindingNumber, PiPeriodic) {
  const ChainGeometry g = build_chain(2, 0.35, 0.3, -0.2);
  for (double p : {-1.2, -0.3, 0.4}) {
    EXPECT_EQ(winding_number(g, p).nu, winding_number(g, p + pi).nu);
  }
}

TEST(WindingNumber, IllDefinedAtGapClosing) {
  const ChainGeometry g = build_chain(2, 0.3);
  const WindingResult w = winding_number(g, 0.0);
  EXPECT_FALSE(w.well_defined);
  EXPECT_LT(w.min_dxy, degeneracy_threshold);
}

TEST(WindingNumber, SymmetricChainTransition) {
  const ChainGeometry g = build_chain(2, 0.3);
  for (double p : {-0.4, -0.25, -0.1, -0.02}) EXPECT_EQ(winding_number(g, p * pi).nu, 1) << p;
  for (double p : {0.02, 0.1, 0.25, 0.4}) EXPECT_EQ(winding_number(g, p * pi).nu, 0) << p;
}

TEST(WindingNumber, RejectsSmallGrid) {
  EXPECT_THROW(winding_number(build_chain(2, 0.3), 0.1, 32), std::invalid_argument);
}
