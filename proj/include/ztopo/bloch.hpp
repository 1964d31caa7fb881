#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "ztopo/dipole_coupling.hpp"
#include "ztopo/geometry.hpp"

namespace ztopo {

inline constexpr double degeneracy_threshold = 1e-6;  // on min sqrt(dx^2 + dy^2)
inline constexpr int default_k_points = 1024;
inline constexpr int default_cutoff_cells = 8192;
inline constexpr double default_bloch_tolerance = 1e-8;
inline constexpr int converge_start_cells = 256;
inline constexpr int converge_cap_cells = 1 << 20;

// H(k) = d0 sigma_0 + d . sigma in the (A, B) basis of a unit cell. The
// off-diagonal element is H_AB = dx - i dy.
struct BlochVector {
  double k = 0.0;
  double phi = 0.0;
  double d0 = 0.0;
  Vec3 d = Vec3::Zero();
  int cutoff_cells = 0;
  bool converged = true;
  bool k_wrapped = false;

  double omega_minus() const { return d0 - d.norm(); }
  double omega_plus() const { return d0 + d.norm(); }
  double dxy() const { return std::hypot(d.x(), d.y()); }

  Eigen::Matrix2cd matrix() const {
    Eigen::Matrix2cd h;
    h << cplx(d0 + d.z(), 0.0), cplx(d.x(), -d.y()), cplx(d.x(), d.y()), cplx(d0 - d.z(), 0.0);
    return h;
  }
};

// Maps k into (-pi/a, pi/a].
inline double wrap_k(double k, double lattice_const) {
  const double period = two_pi / lattice_const;
  double w = std::remainder(k, period);
  if (w <= -pi / lattice_const) w += period;
  return w;
}

namespace detail {

// Omega-valued Green components: coupling_prefactor * Re(G_ab). The lattice
// sums of Omega are linear in these, so they carry all phi dependence.
struct OmegaComponents {
  double xx;
  double xy;
  double yy;

  double project(double c, double s) const { return c * c * xx + 2.0 * c * s * xy + s * s * yy; }
};

inline OmegaComponents omega_components(double x, double y, const ModelParams& params) {
  const InPlaneGreen g = in_plane_green(x, y, params.k0());
  const double pref = coupling_prefactor(params);
  return {pref * g.xx.real(), pref * g.xy.real(), pref * g.yy.real()};
}

inline void check_lattice(const ChainGeometry& geometry) {
  if (!(geometry.lattice_const > 0.0)) throw InvalidGeometry("lattice_const must be > 0");
  if (lattice_has_coincidence(geometry.lattice_const, geometry.shift_x, geometry.shift_y))
    throw CoincidentAtoms("B sublattice coincides with A sublattice in the infinite lattice");
}

// Same-sublattice coupling at separation m*a (m >= 1).
inline OmegaComponents intra_components(const ChainGeometry& g, int m, const ModelParams& params) {
  return omega_components(m * g.lattice_const, 0.0, params);
}

// Coupling from the A atom of cell 0 to the B atom of cell m.
inline OmegaComponents inter_components(const ChainGeometry& g, int m, const ModelParams& params) {
  const Vec3 off = g.intracell_offset();
  return omega_components(m * g.lattice_const + off.x(), off.y(), params);
}

// Running d0 and f for one k and a growing cutoff.
struct PartialBlochSum {
  double d0 = 0.0;
  cplx f{0.0, 0.0};
  int cutoff = 0;

  void extend_to(int cutoff_cells, const ChainGeometry& g, double k, double c, double s,
                 const ModelParams& params) {
    const double a = g.lattice_const;
    if (cutoff == 0) f += inter_components(g, 0, params).project(c, s);
    for (int m = cutoff + 1; m <= cutoff_cells; ++m) {
      d0 += 2.0 * intra_components(g, m, params).project(c, s) * std::cos(k * a * m);
      f += inter_components(g, m, params).project(c, s) * std::polar(1.0, -k * a * m);
      f += inter_components(g, -m, params).project(c, s) * std::polar(1.0, k * a * m);
    }
    cutoff = cutoff_cells;
  }
};

}  // namespace detail

/// Bloch vector from lattice sums truncated at `cutoff_cells` cells on each
/// side. d0 = sum_{m>=1} 2 Omega_AA(m) cos(k a m), f = sum_m Omega_AB(m)
/// e^{-i k a m}, (dx, dy) = (Re f, Im f), dz = 0.
inline BlochVector bloch_hamiltonian(const ChainGeometry& geometry, double phi, double k,
                                     int cutoff_cells = default_cutoff_cells,
                                     const ModelParams& params = {}) {
  if (cutoff_cells < 1) throw InvalidCutoff("cutoff_cells must be >= 1");
  detail::check_lattice(geometry);
  BlochVector v;
  v.k = wrap_k(k, geometry.lattice_const);
  v.k_wrapped = v.k != k;
  v.phi = phi;
  v.cutoff_cells = cutoff_cells;
  detail::PartialBlochSum sum;
  sum.extend_to(cutoff_cells, geometry, v.k, std::cos(phi), std::sin(phi), params);
  v.d0 = sum.d0;
  v.d = {sum.f.real(), sum.f.imag(), 0.0};
  return v;
}

// Doubles the cutoff from 256 cells until d and d0 move by less than
// `tolerance` or the 2^20 cap is reached.
inline BlochVector converge_bloch(const ChainGeometry& geometry, double phi, double k,
                                  double tolerance = default_bloch_tolerance,
                                  const ModelParams& params = {}) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  detail::check_lattice(geometry);
  const double kw = wrap_k(k, geometry.lattice_const);
  const double c = std::cos(phi);
  const double s = std::sin(phi);

  detail::PartialBlochSum sum;
  sum.extend_to(converge_start_cells, geometry, kw, c, s, params);
  bool converged = false;
  while (sum.cutoff < converge_cap_cells) {
    const detail::PartialBlochSum prev = sum;
    sum.extend_to(2 * sum.cutoff, geometry, kw, c, s, params);
    const double change = std::max(std::abs(sum.f - prev.f), std::abs(sum.d0 - prev.d0));
    if (change < tolerance) {
      converged = true;
      break;
    }
  }

  BlochVector v;
  v.k = kw;
  v.k_wrapped = kw != k;
  v.phi = phi;
  v.d0 = sum.d0;
  v.d = {sum.f.real(), sum.f.imag(), 0.0};
  v.cutoff_cells = sum.cutoff;
  v.converged = converged;
  return v;
}

/// Lattice sums of the Green components on a uniform k grid
///   k_n = -pi/a + 2 pi (n + 1 + offset) / (a Nk),  n = 0..Nk-1,
/// so that the Bloch vector at any polarization is a quadratic form in
/// precomputed numbers. Terms with cell index m and m + Nk carry the same
/// phase on the grid, so the sums are folded before the DFT and cost
/// O(M + Nk log Nk).
class BlochLatticeSums {
 public:
  BlochLatticeSums(const ChainGeometry& geometry, int k_points,
                   int cutoff_cells = default_cutoff_cells, const ModelParams& params = {},
                   double k_offset = 0.0)
      : lattice_const_(geometry.lattice_const),
        k_points_(k_points),
        cutoff_cells_(cutoff_cells),
        k_offset_(k_offset) {
    if (k_points < 2) throw std::invalid_argument("k_points must be >= 2");
    if (cutoff_cells < 1) throw InvalidCutoff("cutoff_cells must be >= 1");
    detail::check_lattice(geometry);

    const int nk = k_points;
    // folded coefficients: [aa_xx, aa_yy, ab_xx, ab_xy, ab_yy]
    std::vector<std::array<cplx, 5>> folded(static_cast<std::size_t>(nk), std::array<cplx, 5>{});
    const double twist = -two_pi * k_offset / nk;
    auto accumulate = [&](int m) {
      // (-1)^m e^{-2 pi i offset m / Nk}; the rest of the phase is periodic in m mod Nk
      const cplx phase = std::polar(m % 2 == 0 ? 1.0 : -1.0, twist * m);
      auto& bucket = folded[static_cast<std::size_t>(((m % nk) + nk) % nk)];
      const auto ab = detail::inter_components(geometry, m, params);
      bucket[2] += ab.xx * phase;
      bucket[3] += ab.xy * phase;
      bucket[4] += ab.yy * phase;
      if (m != 0) {
        const auto aa = detail::intra_components(geometry, std::abs(m), params);
        bucket[0] += aa.xx * phase;
        bucket[1] += aa.yy * phase;
      }
    };
    for (int m = -cutoff_cells; m <= cutoff_cells; ++m) accumulate(m);

    aa_xx_.resize(nk);
    aa_yy_.resize(nk);
    ab_xx_.resize(nk);
    ab_xy_.resize(nk);
    ab_yy_.resize(nk);
    // forward FFT: X[t] = sum_r b[r] e^{-2 pi i t r / Nk}; grid point n uses t = n + 1
    Eigen::FFT<double> fft;
    std::vector<cplx> in(static_cast<std::size_t>(nk)), out;
    for (int c = 0; c < 5; ++c) {
      for (int r = 0; r < nk; ++r) in[r] = folded[r][c];
      fft.fwd(out, in);
      for (int n = 0; n < nk; ++n) {
        const cplx v = out[static_cast<std::size_t>((n + 1) % nk)];
        switch (c) {
          case 0: aa_xx_[n] = v.real(); break;
          case 1: aa_yy_[n] = v.real(); break;
          case 2: ab_xx_[n] = v; break;
          case 3: ab_xy_[n] = v; break;
          case 4: ab_yy_[n] = v; break;
        }
      }
    }
  }

  int k_points() const { return k_points_; }
  int cutoff_cells() const { return cutoff_cells_; }
  double lattice_const() const { return lattice_const_; }
  double k_step() const { return two_pi / (lattice_const_ * k_points_); }
  double k(int n) const { return -pi / lattice_const_ + k_step() * (n + 1 + k_offset_); }

  double d0(int n, double c, double s) const {
    // same-sublattice separations lie along x, so the xy component vanishes
    return c * c * aa_xx_[n] + s * s * aa_yy_[n];
  }
  cplx f(int n, double c, double s) const {
    return c * c * ab_xx_[n] + 2.0 * c * s * ab_xy_[n] + s * s * ab_yy_[n];
  }

  // dz is the sigma_z coefficient of the Rice-Mele term: -Delta0 cos(2 phi),
  // matching A sites at -Delta.
  BlochVector at(int n, double phi, double delta0 = 0.0) const {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const cplx fk = f(n, c, s);
    BlochVector v;
    v.k = k(n);
    v.phi = phi;
    v.d0 = d0(n, c, s);
    v.d = {fk.real(), fk.imag(), -delta0 * std::cos(2.0 * phi)};
    v.cutoff_cells = cutoff_cells_;
    return v;
  }

 private:
  double lattice_const_;
  int k_points_;
  int cutoff_cells_;
  double k_offset_;
  std::vector<double> aa_xx_, aa_yy_;
  std::vector<cplx> ab_xx_, ab_xy_, ab_yy_;
};

struct WindingResult {
  int nu = 0;
  double winding = 0.0;  // accumulated angle / 2 pi before rounding
  double min_dxy = 0.0;
  bool well_defined = false;
  int k_points = 0;
  double max_step = 0.0;  // largest |delta theta| between neighbouring k samples
};

inline constexpr double winding_residual_tolerance = 1e-3;
inline constexpr double max_angle_step = pi / 2;
inline constexpr int max_winding_k_points = 8192;

// Winding of (dx, dy) along the closed k loop of a precomputed grid. The
// result's max_step tells the caller whether the grid resolved the loop.
inline WindingResult winding_from_sums(const BlochLatticeSums& sums, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const int nk = sums.k_points();
  WindingResult w;
  w.k_points = nk;
  w.min_dxy = std::numeric_limits<double>::infinity();

  std::vector<cplx> z(static_cast<std::size_t>(nk));
  for (int n = 0; n < nk; ++n) {
    z[n] = sums.f(n, c, s);
    w.min_dxy = std::min(w.min_dxy, std::abs(z[n]));
  }
  if (!(w.min_dxy > 0.0)) {
    w.winding = std::numeric_limits<double>::quiet_NaN();
    w.well_defined = false;
    w.max_step = pi;
    return w;
  }

  double total = 0.0;
  for (int n = 0; n < nk; ++n) {
    const double step = std::arg(z[(n + 1) % nk] / z[n]);
    w.max_step = std::max(w.max_step, std::abs(step));
    total += step;
  }
  w.winding = total / two_pi;
  w.nu = static_cast<int>(std::lround(w.winding));
  w.well_defined = w.min_dxy > degeneracy_threshold && w.max_step <= max_angle_step &&
                   std::abs(w.winding - w.nu) < winding_residual_tolerance;
  return w;
}

/// Winding number of the (dx, dy) loop. The k grid is doubled while any
/// step turns by more than pi/2, up to 8192 points.
inline WindingResult winding_number(const ChainGeometry& geometry, double phi,
                                    int k_grid_size = default_k_points,
                                    int cutoff_cells = default_cutoff_cells,
                                    const ModelParams& params = {}) {
  if (k_grid_size < 64) throw std::invalid_argument("k_grid_size must be >= 64");
  if (cutoff_cells < 1) throw InvalidCutoff("cutoff_cells must be >= 1");
  int nk = k_grid_size;
  for (;;) {
    const BlochLatticeSums sums(geometry, nk, cutoff_cells, params);
    WindingResult w = winding_from_sums(sums, phi);
    if (w.max_step <= max_angle_step || 2 * nk > max_winding_k_points || !(w.min_dxy > 0.0))
      return w;
    nk *= 2;
  }
}

}  // namespace ztopo
