#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ztopo/error.hpp"

namespace ztopo {

using Vec3 = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Emitter constants. Lengths are measured in units of lambda0 and energies
// in units of gamma0, so the defaults are the natural units used by every
// module (k0 = 2*pi). omega0 is kept for reference only; spectra are always
// reported relative to it.
struct ModelParams {
  double omega0 = 0.0;
  double gamma0 = 1.0;
  double lambda0 = 1.0;

  double k0() const { return two_pi / lambda0; }

  void validate() const {
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
      throw ValidationError("gamma0 must be > 0");
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
      throw ValidationError("lambda0 must be > 0");
  }
};

enum class Sublattice { A, B };

// Zigzag chain of N emitters, two per unit cell. Site 2j is the A atom of
// cell j at (j a, 0, 0); site 2j+1 is the B atom at
// (j a + a/2 + shift_x a, a/2 + shift_y a, 0). Shifts are in units of a,
// every length in units of lambda0.
struct ChainGeometry {
  int n_atoms = 0;
  double lattice_const = 0.0;
  double shift_x = 0.0;
  double shift_y = 0.0;
  std::vector<Vec3> positions;

  int n_cells() const { return n_atoms / 2; }
  static Sublattice sublattice(int site) { return site % 2 == 0 ? Sublattice::A : Sublattice::B; }
  static int cell(int site) { return site / 2; }

  // Vector from the A atom to the B atom of the same cell.
  Vec3 intracell_offset() const {
    return {(0.5 + shift_x) * lattice_const, (0.5 + shift_y) * lattice_const, 0.0};
  }
};

inline constexpr double coincidence_tolerance = 1e-12;

// True when two sites of the infinite lattice coincide, i.e. the B atom
// lands on some A atom.
inline bool lattice_has_coincidence(double lattice_const, double shift_x, double shift_y) {
  const double by = (0.5 + shift_y) * lattice_const;
  if (std::abs(by) >= coincidence_tolerance) return false;
  const double bx = (0.5 + shift_x) * lattice_const;
  const double nearest = std::round(bx / lattice_const) * lattice_const;
  return std::abs(bx - nearest) < coincidence_tolerance;
}

inline ChainGeometry build_chain(int n_atoms, double lattice_const, double shift_x = 0.0,
                                 double shift_y = 0.0) {
  if (n_atoms < 2 || n_atoms % 2 != 0)
    throw InvalidGeometry("n_atoms must be even and >= 2, got " + std::to_string(n_atoms));
  if (!(lattice_const > 0.0) || !std::isfinite(lattice_const))
    throw InvalidGeometry("lattice_const must be > 0");
  if (!std::isfinite(shift_x) || !std::isfinite(shift_y))
    throw InvalidGeometry("sublattice shifts must be finite");

  ChainGeometry g{n_atoms, lattice_const, shift_x, shift_y, {}};
  g.positions.reserve(static_cast<std::size_t>(n_atoms));
  const Vec3 offset = g.intracell_offset();
  for (int j = 0; j < n_atoms / 2; ++j) {
    const Vec3 origin{j * lattice_const, 0.0, 0.0};
    g.positions.push_back(origin);
    g.positions.push_back(origin + offset);
  }

  for (int i = 0; i < n_atoms; ++i) {
    for (int j = i + 1; j < n_atoms; ++j) {
      if ((g.positions[i] - g.positions[j]).norm() < coincidence_tolerance)
        throw CoincidentAtoms("atoms " + std::to_string(i + 1) + " and " +
                              std::to_string(j + 1) + " coincide");
    }
  }
  return g;
}

// In-plane polarization angle, canonical range (-pi/2, pi/2].
struct Polarization {
  double phi = 0.0;

  Vec3 dipole() const { return {std::cos(phi), std::sin(phi), 0.0}; }
};

inline Polarization canonicalize_phi(double phi_raw) {
  if (!std::isfinite(phi_raw)) throw InvalidAngle("polarization angle must be finite");
  // remainder() rounds the quotient half-to-even, so +pi/2 stays put
  double phi = std::remainder(phi_raw, pi);
  if (phi <= -pi / 2) phi += pi;
  return {phi};
}

}  // namespace ztopo
