#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ztopo/bloch.hpp"
#include "ztopo/dipole_coupling.hpp"
#include "ztopo/realspace.hpp"

namespace ztopo {

enum class Band { lower, upper };

inline constexpr double band_gap_threshold = 1e-8;

// Pairwise summation keeps the Chern sums order-independent to round-off.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline BlochVector rice_mele_bloch(const ChainGeometry& geometry, double phi, double k,
                                   double delta0, int cutoff_cells = default_cutoff_cells,
                                   const ModelParams& params = {}) {
  BlochVector v = bloch_hamiltonian(geometry, phi, k, cutoff_cells, params);
  v.d.z() = -delta0 * std::cos(2.0 * phi);
  return v;
}

// Normalized eigenvector of d.sigma for the requested band, taken from the
// better-conditioned column of the spectral projector (1 +- d^.sigma) / 2.
inline Eigen::Vector2cd band_vector(const Vec3& d, Band band) {
  const Vec3 n = d.normalized();
  const cplx xy(n.x(), n.y());
  Eigen::Vector2cd u;
  if (band == Band::upper) {
    if (n.z() >= 0.0) u << 1.0 + n.z(), xy;
    else u << std::conj(xy), 1.0 - n.z();
  } else {
    if (n.z() <= 0.0) u << 1.0 - n.z(), -xy;
    else u << -std::conj(xy), 1.0 + n.z();
  }
  return u.normalized();
}

struct SyntheticBandGrid {
  int nk = 0;
  int nphi = 0;
  double lattice_const = 0.0;
  double delta0 = 0.0;
  std::vector<double> k;          // band vertices, (-pi/a, pi/a]
  std::vector<double> phi;        // band vertices, (-pi/2, pi/2]
  std::vector<double> berry_k;    // plaquette centres, wrapped into the zone
  std::vector<double> berry_phi;  // plaquette centres, wrapped into (-pi/2, pi/2]
  Eigen::MatrixXd omega_minus, omega_plus;  // nk x nphi
  Eigen::MatrixXd berry_minus, berry_plus;  // curvature density, plaquette (i, j)
  Eigen::MatrixXd gamma_minus, gamma_plus;  // empty unless decay rates were requested
  double min_gap = 0.0;

  double k_step() const { return two_pi / (lattice_const * nk); }
  double phi_step() const { return pi / nphi; }
  double plaquette_area() const { return k_step() * phi_step(); }
};

namespace detail {

// Per-polarization helper for decay rates of plane-wave states on a finite
// chain: T_ss'(D) = sum_j Gamma_(s,j),(s',j+D) turns psi^+ Gamma psi into an
// O(N) sum per k.
class PlaneWaveDecay {
 public:
  PlaneWaveDecay(const Eigen::MatrixXd& gamma, int n_cells)
      : n_cells_(n_cells), t_(4, std::vector<double>(2 * n_cells - 1, 0.0)) {
    for (int s = 0; s < 2; ++s)
      for (int sp = 0; sp < 2; ++sp)
        for (int j = 0; j < n_cells; ++j)
          for (int jp = 0; jp < n_cells; ++jp)
            t_[2 * s + sp][jp - j + n_cells - 1] += gamma(2 * j + s, 2 * jp + sp);
  }

  double rate(const Eigen::Vector2cd& u, double ka) const {
    Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
    for (int dd = -(n_cells_ - 1); dd <= n_cells_ - 1; ++dd) {
      const cplx ph = std::polar(1.0, ka * dd);
      for (int c = 0; c < 4; ++c) s(c / 2, c % 2) += t_[c][dd + n_cells_ - 1] * ph;
    }
    return (u.adjoint() * s * u)(0, 0).real() / n_cells_;
  }

 private:
  int n_cells_;
  std::vector<std::vector<double>> t_;
};

inline double link_phase_flux(const cplx& u1, const cplx& u2, const cplx& u3, const cplx& u4) {
  // u1: (i,j)->(i+1,j), u2: (i+1,j)->(i+1,j+1), u3: (i,j+1)->(i+1,j+1), u4: (i,j)->(i,j+1)
  return -std::arg(u1 * u2 * std::conj(u3) * std::conj(u4));
}

}  // namespace detail

/// Bands, link-variable Berry curvature and (optionally) plane-wave decay
/// rates on the synthetic torus k in (-pi/a, pi/a], phi in (-pi/2, pi/2].
/// Curvature follows F = -2 Im <d_k u | d_phi u>; berry_* hold the flux of
/// each plaquette divided by its area.
inline SyntheticBandGrid berry_curvature_grid(const ChainGeometry& geometry, double delta0,
                                              int nk, int nphi,
                                              int cutoff_cells = default_cutoff_cells,
                                              const ModelParams& params = {},
                                              bool with_decay_rates = true) {
  if (nk < 64 || nphi < 64) throw std::invalid_argument("berry_curvature_grid needs Nk, Nphi >= 64");
  if (delta0 == 0.0) throw std::invalid_argument("berry_curvature_grid needs delta0 != 0");

  SyntheticBandGrid g;
  g.nk = nk;
  g.nphi = nphi;
  g.lattice_const = geometry.lattice_const;
  g.delta0 = delta0;
  const BlochLatticeSums sums(geometry, nk, cutoff_cells, params);
  const double dk = g.k_step();
  const double dphi = g.phi_step();

  g.k.resize(nk);
  g.berry_k.resize(nk);
  for (int i = 0; i < nk; ++i) {
    g.k[i] = sums.k(i);
    g.berry_k[i] = wrap_k(sums.k(i) + 0.5 * dk, geometry.lattice_const);
  }
  g.phi.resize(nphi);
  g.berry_phi.resize(nphi);
  for (int j = 0; j < nphi; ++j) {
    g.phi[j] = -pi / 2 + dphi * (j + 1);
    g.berry_phi[j] = canonicalize_phi(g.phi[j] + 0.5 * dphi).phi;
  }

  g.omega_minus.resize(nk, nphi);
  g.omega_plus.resize(nk, nphi);
  std::vector<Eigen::Vector2cd> lower(static_cast<std::size_t>(nk) * nphi);
  std::vector<Eigen::Vector2cd> upper(lower.size());
  auto at = [nk](int i, int j) { return static_cast<std::size_t>(j) * nk + i; };

  g.min_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < nphi; ++j) {
    for (int i = 0; i < nk; ++i) {
      const BlochVector v = sums.at(i, g.phi[j], delta0);
      const double gap = 2.0 * v.d.norm();
      g.min_gap = std::min(g.min_gap, gap);
      if (!(gap >= band_gap_threshold))
        throw DegenerateBands("bands touch at k = " + std::to_string(v.k) +
                                  ", phi = " + std::to_string(v.phi),
                              v.k, v.phi);
      g.omega_minus(i, j) = v.omega_minus();
      g.omega_plus(i, j) = v.omega_plus();
      lower[at(i, j)] = band_vector(v.d, Band::lower);
      upper[at(i, j)] = band_vector(v.d, Band::upper);
    }
  }

  auto curvature = [&](const std::vector<Eigen::Vector2cd>& u) {
    Eigen::MatrixXd f(nk, nphi);
    for (int j = 0; j < nphi; ++j) {
      const int jn = (j + 1) % nphi;
      for (int i = 0; i < nk; ++i) {
        const int in = (i + 1) % nk;
        const cplx u1 = u[at(i, j)].dot(u[at(in, j)]);
        const cplx u2 = u[at(in, j)].dot(u[at(in, jn)]);
        const cplx u3 = u[at(i, jn)].dot(u[at(in, jn)]);
        const cplx u4 = u[at(i, j)].dot(u[at(i, jn)]);
        f(i, j) = detail::link_phase_flux(u1, u2, u3, u4) / (dk * dphi);
      }
    }
    return f;
  };
  g.berry_minus = curvature(lower);
  g.berry_plus = curvature(upper);

  if (with_decay_rates) {
    g.gamma_minus.resize(nk, nphi);
    g.gamma_plus.resize(nk, nphi);
    for (int j = 0; j < nphi; ++j) {
      const CouplingMatrices cm = build_coupling_matrices(geometry, {g.phi[j]}, params);
      const detail::PlaneWaveDecay decay(cm.gamma, geometry.n_cells());
      for (int i = 0; i < nk; ++i) {
        const double ka = g.k[i] * geometry.lattice_const;
        g.gamma_minus(i, j) = decay.rate(lower[at(i, j)], ka);
        g.gamma_plus(i, j) = decay.rate(upper[at(i, j)], ka);
      }
    }
  }
  return g;
}

struct PumpResult {
  std::vector<double> k;             // plaquette-centre quasimomenta
  std::vector<double> displacement;  // unit cells, lower band
  std::vector<double> displacement_upper;
  int chern_minus = 0;
  int chern_plus = 0;
  double chern_minus_raw = 0.0;
  double chern_plus_raw = 0.0;
};

inline constexpr double chern_integer_tolerance = 1e-6;

/// Displacement after a pi rotation of the polarization, Delta x(k) =
/// int F dphi, in unit cells, and the Chern numbers of both bands.
inline PumpResult pump_displacement(const SyntheticBandGrid& grid) {
  PumpResult p;
  p.k = grid.berry_k;
  const double dphi = grid.phi_step();
  const double a = grid.lattice_const;
  p.displacement.resize(grid.nk);
  p.displacement_upper.resize(grid.nk);
  std::vector<double> lower_flux, upper_flux, row;
  lower_flux.reserve(static_cast<std::size_t>(grid.nk) * grid.nphi);
  upper_flux.reserve(lower_flux.capacity());
  const double area = grid.plaquette_area();
  for (int i = 0; i < grid.nk; ++i) {
    row.clear();
    for (int j = 0; j < grid.nphi; ++j) row.push_back(grid.berry_minus(i, j) * dphi);
    p.displacement[i] = pairwise_sum(row) / a;
    row.clear();
    for (int j = 0; j < grid.nphi; ++j) row.push_back(grid.berry_plus(i, j) * dphi);
    p.displacement_upper[i] = pairwise_sum(row) / a;
    for (int j = 0; j < grid.nphi; ++j) {
      lower_flux.push_back(grid.berry_minus(i, j) * area);
      upper_flux.push_back(grid.berry_plus(i, j) * area);
    }
  }
  p.chern_minus_raw = pairwise_sum(lower_flux) / two_pi;
  p.chern_plus_raw = pairwise_sum(upper_flux) / two_pi;
  p.chern_minus = static_cast<int>(std::lround(p.chern_minus_raw));
  p.chern_plus = static_cast<int>(std::lround(p.chern_plus_raw));
  if (std::abs(p.chern_minus_raw - p.chern_minus) > chern_integer_tolerance ||
      std::abs(p.chern_plus_raw - p.chern_plus) > chern_integer_tolerance)
    throw NumericalFailure("link-variable Chern sum is not an integer");
  return p;
}

/// Collective decay rate of the finite-chain plane wave built from the Bloch
/// eigenvector of `band`: psi_i ~ u_s(k, phi) e^{i k x_cell(i)}, normalized.
inline double bloch_decay_rate(const ChainGeometry& geometry, double k, double phi, Band band,
                               double delta0 = 0.0, int cutoff_cells = default_cutoff_cells,
                               const ModelParams& params = {}) {
  const BlochVector v = rice_mele_bloch(geometry, phi, k, delta0, cutoff_cells, params);
  const Eigen::Vector2cd u = band_vector(v.d, band);
  const int n = geometry.n_atoms;
  Eigen::VectorXcd psi(n);
  for (int i = 0; i < n; ++i) {
    const double x_cell = ChainGeometry::cell(i) * geometry.lattice_const;
    psi(i) = u(i % 2) * std::polar(1.0, v.k * x_cell);
  }
  psi.normalize();
  const CouplingMatrices cm = build_coupling_matrices(geometry, {phi}, params);
  return decay_expectation(psi, cm.gamma);
}

}  // namespace ztopo
