#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>

#include <Eigen/Core>

#include "ztopo/geometry.hpp"

namespace ztopo {

using cplx = std::complex<double>;

struct GreenTensor {
  Eigen::Matrix3cd value;
  Vec3 separation;
};

/// Free-space dyadic Green's function at frequency omega0,
///   G(r) = e^{i k r} / (4 pi k^2 r^3) [ (k^2 r^2 + i k r - 1) 1
///                                     + (-k^2 r^2 - 3 i k r + 3) r r^T / r^2 ].
inline GreenTensor green_tensor(const Vec3& separation, double k0) {
  const double r = separation.norm();
  if (!(r > 0.0)) throw SingularSeparation("Green's function evaluated at zero separation");
  const double kr = k0 * r;
  const cplx prefactor = std::exp(cplx(0.0, kr)) / (4.0 * pi * k0 * k0 * r * r * r);
  const cplx transverse(kr * kr - 1.0, kr);
  const cplx longitudinal(3.0 - kr * kr, -3.0 * kr);
  const Eigen::Matrix3d projector = separation * separation.transpose() / (r * r);
  GreenTensor g;
  g.separation = separation;
  g.value = prefactor * (transverse * Eigen::Matrix3cd::Identity() +
                         longitudinal * projector.cast<cplx>());
  return g;
}

// The xx, xy, yy block of G for a separation in the xy-plane. Every coupling
// between in-plane dipoles is a quadratic form in these three numbers, which
// is what lets the lattice sums be reused for all polarization angles.
struct InPlaneGreen {
  cplx xx;
  cplx xy;
  cplx yy;

  cplx project(double c, double s) const { return c * c * xx + 2.0 * c * s * xy + s * s * yy; }
};

inline InPlaneGreen in_plane_green(double x, double y, double k0) {
  const double r2 = x * x + y * y;
  const double r = std::sqrt(r2);
  if (!(r > 0.0)) throw SingularSeparation("Green's function evaluated at zero separation");
  const double kr = k0 * r;
  const cplx prefactor = std::exp(cplx(0.0, kr)) / (4.0 * pi * k0 * k0 * r2 * r);
  const cplx transverse(kr * kr - 1.0, kr);
  const cplx longitudinal = cplx(3.0 - kr * kr, -3.0 * kr) / r2;
  return {prefactor * (transverse + longitudinal * x * x), prefactor * longitudinal * x * y,
          prefactor * (transverse + longitudinal * y * y)};
}

// -gamma0 * 3 pi / k0: converts p.G.p into Omega - i Gamma / 2.
inline double coupling_prefactor(const ModelParams& params) {
  return -params.gamma0 * 3.0 * pi / params.k0();
}

struct PairCoupling {
  double omega;
  double gamma;
};

inline PairCoupling coupling_from_projection(cplx projected, const ModelParams& params) {
  const cplx c = coupling_prefactor(params) * projected;
  return {c.real(), -2.0 * c.imag()};
}

inline PairCoupling pair_coupling(const Vec3& r_i, const Vec3& r_j, Polarization pol,
                                  const ModelParams& params = {}) {
  const Vec3 sep = r_i - r_j;
  if (!(sep.norm() > 0.0)) throw SingularSeparation("pair_coupling on coincident positions");
  const Vec3 p = pol.dipole();
  const GreenTensor g = green_tensor(sep, params.k0());
  const cplx projected = p.cast<cplx>().dot(g.value * p.cast<cplx>());
  return coupling_from_projection(projected, params);
}

struct CouplingMatrices {
  Eigen::MatrixXd omega;
  Eigen::MatrixXd gamma;
  double phi = 0.0;
};

inline CouplingMatrices build_coupling_matrices(const ChainGeometry& geometry, Polarization pol,
                                                const ModelParams& params = {}) {
  const int n = geometry.n_atoms;
  const double c = std::cos(pol.phi);
  const double s = std::sin(pol.phi);
  const double k0 = params.k0();

  CouplingMatrices m;
  m.phi = pol.phi;
  m.omega = Eigen::MatrixXd::Zero(n, n);
  m.gamma = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m.gamma(i, i) = params.gamma0;
    for (int j = i + 1; j < n; ++j) {
      const Vec3 sep = geometry.positions[i] - geometry.positions[j];
      const auto pc =
          coupling_from_projection(in_plane_green(sep.x(), sep.y(), k0).project(c, s), params);
      m.omega(i, j) = m.omega(j, i) = pc.omega;
      m.gamma(i, j) = m.gamma(j, i) = pc.gamma;
    }
  }
  return m;
}

// Row-major dump with header `i,j,omega,gamma`; indices are 1-based.
inline void write_coupling_csv(std::ostream& out, const CouplingMatrices& m) {
  out << "i,j,omega,gamma\n";
  char buf[96];
  for (Eigen::Index i = 0; i < m.omega.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.omega.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%td,%td,%.12e,%.12e\n", i + 1, j + 1, m.omega(i, j),
                    m.gamma(i, j));
      out << buf;
    }
  }
}

}  // namespace ztopo
