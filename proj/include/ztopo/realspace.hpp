#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "ztopo/dipole_coupling.hpp"

namespace ztopo {

// Rice-Mele on-site term Delta(phi) * (-1)^i with i = 1..N, so the A sites
// (odd 1-based index) sit at -Delta(phi) and the B sites at +Delta(phi).
struct StaggeredPotential {
  double delta0 = 0.0;
  double phi = 0.0;

  double amplitude() const { return delta0 * std::cos(2.0 * phi); }
  double onsite(int site) const {
    return ChainGeometry::sublattice(site) == Sublattice::A ? -amplitude() : amplitude();
  }
};

struct RealSpaceHamiltonian {
  Eigen::MatrixXd matrix;
  bool includes_intrasublattice = true;
  std::optional<StaggeredPotential> staggered;
};

inline RealSpaceHamiltonian build_hamiltonian(const CouplingMatrices& couplings,
                                              std::optional<double> staggered_delta = {}) {
  RealSpaceHamiltonian h;
  h.matrix = couplings.omega;
  h.matrix.diagonal().setZero();
  if (staggered_delta) {
    StaggeredPotential pot{*staggered_delta, couplings.phi};
    for (Eigen::Index i = 0; i < h.matrix.rows(); ++i)
      h.matrix(i, i) = pot.onsite(static_cast<int>(i));
    h.staggered = pot;
  }
  return h;
}

// Drops every A-A and B-B element, leaving a chiral (bipartite) matrix.
inline RealSpaceHamiltonian strip_intrasublattice(const RealSpaceHamiltonian& hamiltonian,
                                                  const ChainGeometry& geometry) {
  if (hamiltonian.staggered)
    throw std::invalid_argument("strip_intrasublattice expects a Hamiltonian without staggering");
  if (hamiltonian.matrix.rows() != geometry.n_atoms)
    throw std::invalid_argument("Hamiltonian size does not match the geometry");
  RealSpaceHamiltonian out = hamiltonian;
  const Eigen::Index n = out.matrix.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i % 2; j < n; j += 2) out.matrix(i, j) = 0.0;
  out.includes_intrasublattice = false;
  return out;
}

inline double inverse_participation_ratio(const Eigen::Ref<const Eigen::VectorXd>& state) {
  return state.array().square().square().sum();
}

struct SpectrumResult {
  Eigen::VectorXd eigenvalues;   // ascending, omega - omega0 in units of gamma0
  Eigen::MatrixXd eigenvectors;  // column m belongs to eigenvalues[m]
  Eigen::VectorXd ipr;
  double loc = 0.0;

  Eigen::Index size() const { return eigenvalues.size(); }
};

inline SpectrumResult diagonalize(const RealSpaceHamiltonian& hamiltonian) {
  const Eigen::MatrixXd& h = hamiltonian.matrix;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success || !solver.eigenvalues().allFinite()) {
    std::ostringstream msg;
    msg << "eigensolver failed for " << h.rows() << "x" << h.cols()
        << " matrix (max |H_ij| = " << h.cwiseAbs().maxCoeff()
        << ", finite = " << (h.allFinite() ? "yes" : "no")
        << ", asymmetry = " << (h - h.transpose()).cwiseAbs().maxCoeff() << ")";
    throw NumericalFailure(msg.str());
  }

  SpectrumResult r;
  r.eigenvalues = solver.eigenvalues();
  r.eigenvectors = solver.eigenvectors();
  const Eigen::Index n = h.rows();
  r.ipr.resize(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    auto v = r.eigenvectors.col(m);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    r.ipr(m) = inverse_participation_ratio(v);
  }
  r.loc = n > 0 ? r.ipr.maxCoeff() : 0.0;
  return r;
}

inline constexpr double edge_tie_tolerance = 1e-12;

struct EdgeProfile {
  int state_index = -1;
  Eigen::VectorXd populations;
  bool tie = false;  // another state had the same first-site weight
};

// State with the largest weight on site 1; ties go to the lower eigenvalue,
// which is the first one met in ascending order.
inline EdgeProfile edge_profile(const SpectrumResult& spectrum) {
  EdgeProfile e;
  double best = -1.0;
  for (Eigen::Index m = 0; m < spectrum.size(); ++m) {
    const double w = spectrum.eigenvectors(0, m) * spectrum.eigenvectors(0, m);
    if (w > best + edge_tie_tolerance) {
      best = w;
      e.state_index = static_cast<int>(m);
      e.tie = false;
    } else if (std::abs(w - best) <= edge_tie_tolerance) {
      e.tie = true;
    }
  }
  if (e.state_index >= 0) e.populations = spectrum.eigenvectors.col(e.state_index).array().square();
  return e;
}

// Population on the `per_edge` outermost sites at each end of the chain.
inline double boundary_weight(const Eigen::Ref<const Eigen::VectorXd>& state, int per_edge = 2) {
  const Eigen::Index n = state.size();
  const Eigen::Index k = std::min<Eigen::Index>(per_edge, n / 2);
  return state.head(k).squaredNorm() + state.tail(k).squaredNorm();
}

// Indices of eigenvalues with |omega| < fraction * bulk_gap.
inline std::vector<int> midgap_states(const SpectrumResult& spectrum, double bulk_gap,
                                      double fraction = 0.1) {
  std::vector<int> out;
  for (Eigen::Index m = 0; m < spectrum.size(); ++m)
    if (std::abs(spectrum.eigenvalues(m)) < fraction * bulk_gap) out.push_back(static_cast<int>(m));
  return out;
}

inline constexpr double state_norm_tolerance = 1e-8;

/// Collective decay rate sum_ij Gamma_ij psi_i^* psi_j of a normalized
/// single-excitation state.
inline double decay_expectation(const Eigen::Ref<const Eigen::VectorXcd>& state,
                                const Eigen::Ref<const Eigen::MatrixXd>& gamma) {
  if (state.size() != gamma.rows() || gamma.rows() != gamma.cols())
    throw InvalidState("state length does not match the decay matrix");
  if (std::abs(state.norm() - 1.0) > state_norm_tolerance)
    throw InvalidState("state is not normalized");
  return (state.adjoint() * gamma.cast<cplx>() * state)(0, 0).real();
}

inline double decay_expectation(const Eigen::Ref<const Eigen::VectorXd>& state,
                                const Eigen::Ref<const Eigen::MatrixXd>& gamma) {
  if (state.size() != gamma.rows() || gamma.rows() != gamma.cols())
    throw InvalidState("state length does not match the decay matrix");
  if (std::abs(state.norm() - 1.0) > state_norm_tolerance)
    throw InvalidState("state is not normalized");
  return state.dot(gamma * state);
}

}  // namespace ztopo
