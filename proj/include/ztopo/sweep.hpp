#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ztopo/bloch.hpp"
#include "ztopo/parallel.hpp"
#include "ztopo/realspace.hpp"

namespace ztopo {

// shift_diag moves the B sublattice along the diagonal (shift_x = shift_y).
enum class SweepParameter { phi, shift_x, shift_y, shift_diag, lattice_const, delta0 };

inline std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::phi: return "phi";
    case SweepParameter::shift_x: return "shift_x";
    case SweepParameter::shift_y: return "shift_y";
    case SweepParameter::shift_diag: return "shift_diag";
    case SweepParameter::lattice_const: return "lattice_const";
    case SweepParameter::delta0: return "delta0";
  }
  return "?";
}

inline SweepParameter parse_sweep_parameter(std::string_view name) {
  for (auto p : {SweepParameter::phi, SweepParameter::shift_x, SweepParameter::shift_y,
                 SweepParameter::shift_diag, SweepParameter::lattice_const,
                 SweepParameter::delta0})
    if (name == to_string(p)) return p;
  throw ValidationError("unknown sweep parameter '" + std::string(name) +
                        "' (expected phi, shift_x, shift_y, shift_diag, lattice_const or delta0)");
}

struct SweepAxis {
  SweepParameter parameter = SweepParameter::phi;
  double start = 0.0;
  double stop = 0.0;
  int count = 2;

  double value(int i) const { return start + (stop - start) * i / (count - 1); }

  // "name:start:stop:count", e.g. "phi:-1.5708:1.5708:201"
  static SweepAxis parse(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = text.find(':', pos);
      parts.emplace_back(text.substr(pos, next - pos));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    if (parts.size() != 4)
      throw ValidationError("axis must look like name:start:stop:count, got '" +
                            std::string(text) + "'");
    SweepAxis axis;
    axis.parameter = parse_sweep_parameter(parts[0]);
    try {
      std::size_t used = 0;
      axis.start = std::stod(parts[1], &used);
      if (used != parts[1].size()) throw std::invalid_argument("trailing characters");
      axis.stop = std::stod(parts[2], &used);
      if (used != parts[2].size()) throw std::invalid_argument("trailing characters");
      axis.count = std::stoi(parts[3], &used);
      if (used != parts[3].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::logic_error&) {
      throw ValidationError("malformed number in axis '" + std::string(text) + "'");
    }
    return axis;
  }

  std::string str() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s:%.17g:%.17g:%d", std::string(to_string(parameter)).c_str(),
                  start, stop, count);
    return buf;
  }
};

struct SweepFixed {
  int n_atoms = 50;
  double lattice_const = 0.35;
  double shift_x = 0.0;
  double shift_y = 0.0;
  double phi = 0.0;
  double delta0 = 0.0;
  int k_points = default_k_points;
  int cutoff_cells = default_cutoff_cells;
};

struct SweepSpec {
  SweepAxis axis1;
  SweepAxis axis2;
  SweepFixed fixed;

  void validate() const {
    for (const SweepAxis* ax : {&axis1, &axis2}) {
      if (ax->count < 2) throw ValidationError("axis count must be >= 2");
      if (!std::isfinite(ax->start) || !std::isfinite(ax->stop))
        throw ValidationError("axis range must be finite");
    }
    if (axis1.parameter == axis2.parameter)
      throw ValidationError("the two sweep axes must use different parameters");
    auto touches_shift = [](SweepParameter p) {
      return p == SweepParameter::shift_x || p == SweepParameter::shift_y ||
             p == SweepParameter::shift_diag;
    };
    if (touches_shift(axis1.parameter) && touches_shift(axis2.parameter) &&
        (axis1.parameter == SweepParameter::shift_diag ||
         axis2.parameter == SweepParameter::shift_diag))
      throw ValidationError("shift_diag cannot be combined with another shift axis");
    if (fixed.n_atoms < 2 || fixed.n_atoms % 2 != 0)
      throw ValidationError("n_atoms must be even and >= 2");
    if (!(fixed.lattice_const > 0.0)) throw ValidationError("lattice_const must be > 0");
    if (fixed.k_points < 64) throw ValidationError("k_points must be >= 64");
    if (fixed.cutoff_cells < 1) throw ValidationError("cutoff_cells must be >= 1");
  }
};

struct CellParameters {
  double phi;
  double shift_x;
  double shift_y;
  double lattice_const;
  double delta0;
};

inline CellParameters cell_parameters(const SweepSpec& spec, int i1, int i2) {
  CellParameters c{spec.fixed.phi, spec.fixed.shift_x, spec.fixed.shift_y,
                   spec.fixed.lattice_const, spec.fixed.delta0};
  auto apply = [&c](SweepParameter p, double v) {
    switch (p) {
      case SweepParameter::phi: c.phi = v; break;
      case SweepParameter::shift_x: c.shift_x = v; break;
      case SweepParameter::shift_y: c.shift_y = v; break;
      case SweepParameter::shift_diag: c.shift_x = c.shift_y = v; break;
      case SweepParameter::lattice_const: c.lattice_const = v; break;
      case SweepParameter::delta0: c.delta0 = v; break;
    }
  };
  apply(spec.axis1.parameter, spec.axis1.value(i1));
  apply(spec.axis2.parameter, spec.axis2.value(i2));
  return c;
}

// Sentinels outside the physical range of winding numbers.
inline constexpr int nu_ill_defined = 99;
inline constexpr int nu_failed = -99;

struct CellError {
  int i1;
  int i2;
  std::string message;
};

struct PhaseDiagramGrid {
  SweepSpec spec;
  std::vector<int> nu;  // nu_ill_defined / nu_failed sentinels
  std::vector<double> winding_raw;
  std::vector<double> min_dxy;
  std::vector<double> loc;  // NaN for failed cells
  std::vector<std::uint8_t> well_defined;
  std::vector<CellError> errors;  // ordered by cell index
  double runtime_per_cell = 0.0;  // seconds, informational only
  double wall_seconds = 0.0;

  int rows() const { return spec.axis1.count; }
  int cols() const { return spec.axis2.count; }
  std::size_t index(int i1, int i2) const {
    return static_cast<std::size_t>(i1) * static_cast<std::size_t>(cols()) + i2;
  }
  std::size_t size() const { return nu.size(); }
};

struct CellResult {
  int nu = nu_failed;
  double winding = std::numeric_limits<double>::quiet_NaN();
  double min_dxy = std::numeric_limits<double>::quiet_NaN();
  double loc = std::numeric_limits<double>::quiet_NaN();
  bool well_defined = false;
};

/// Winding number and maximal IPR for one parameter point. `sums` may hold
/// precomputed lattice sums for the point's geometry.
inline CellResult evaluate_cell(const CellParameters& p, const SweepFixed& fixed,
                                const BlochLatticeSums* sums = nullptr,
                                const ModelParams& params = {}) {
  const ChainGeometry geometry = build_chain(fixed.n_atoms, p.lattice_const, p.shift_x, p.shift_y);
  CellResult r;
  WindingResult w;
  if (sums) {
    w = winding_from_sums(*sums, p.phi);
    if (w.max_step > max_angle_step && w.min_dxy > 0.0)
      w = winding_number(geometry, p.phi, 2 * fixed.k_points, fixed.cutoff_cells, params);
  } else {
    w = winding_number(geometry, p.phi, fixed.k_points, fixed.cutoff_cells, params);
  }
  r.winding = w.winding;
  r.min_dxy = w.min_dxy;
  r.well_defined = w.well_defined;
  r.nu = w.well_defined ? w.nu : nu_ill_defined;

  const CouplingMatrices cm = build_coupling_matrices(geometry, {p.phi}, params);
  const auto h = build_hamiltonian(
      cm, p.delta0 != 0.0 ? std::optional<double>(p.delta0) : std::nullopt);
  r.loc = diagonalize(h).loc;
  return r;
}

/// Phase diagram of winding number and localization over two axes. Cells are
/// written into preallocated slots by index, so the result does not depend
/// on the number of workers. A failing cell is recorded and skipped.
inline PhaseDiagramGrid run_sweep(const SweepSpec& spec, int jobs = default_jobs(),
                                  std::atomic<std::size_t>* progress = nullptr,
                                  const ModelParams& params = {}) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n1 = spec.axis1.count;
  const int n2 = spec.axis2.count;
  const std::size_t cells = static_cast<std::size_t>(n1) * n2;

  PhaseDiagramGrid grid;
  grid.spec = spec;
  grid.nu.assign(cells, nu_failed);
  grid.winding_raw.assign(cells, std::numeric_limits<double>::quiet_NaN());
  grid.min_dxy.assign(cells, std::numeric_limits<double>::quiet_NaN());
  grid.loc.assign(cells, std::numeric_limits<double>::quiet_NaN());
  grid.well_defined.assign(cells, 0);

  // Lattice sums depend on the geometry only; share them across polarizations.
  using Key = std::tuple<double, double, double>;
  std::map<Key, std::size_t> geometry_index;
  std::vector<Key> geometries;
  std::vector<std::size_t> cell_geometry(cells);
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const CellParameters p = cell_parameters(spec, i1, i2);
      const Key key{p.lattice_const, p.shift_x, p.shift_y};
      auto [it, inserted] = geometry_index.emplace(key, geometries.size());
      if (inserted) geometries.push_back(key);
      cell_geometry[grid.index(i1, i2)] = it->second;
    }
  }
  std::vector<std::optional<BlochLatticeSums>> sums(geometries.size());
  parallel_for(geometries.size(), jobs, [&](std::size_t g) {
    const auto& [a, sx, sy] = geometries[g];
    try {
      if (a > 0.0 && !lattice_has_coincidence(a, sx, sy)) {
        ChainGeometry lattice{spec.fixed.n_atoms, a, sx, sy, {}};
        sums[g].emplace(lattice, spec.fixed.k_points, spec.fixed.cutoff_cells, params);
      }
    } catch (const std::exception&) {
      // left empty; the cell evaluation reports the error
    }
  });

  std::vector<std::string> messages(cells);
  parallel_for(cells, jobs, [&](std::size_t idx) {
    const int i1 = static_cast<int>(idx / n2);
    const int i2 = static_cast<int>(idx % n2);
    try {
      const auto& s = sums[cell_geometry[idx]];
      const CellResult r =
          evaluate_cell(cell_parameters(spec, i1, i2), spec.fixed, s ? &*s : nullptr, params);
      grid.nu[idx] = r.nu;
      grid.winding_raw[idx] = r.winding;
      grid.min_dxy[idx] = r.min_dxy;
      grid.loc[idx] = r.loc;
      grid.well_defined[idx] = r.well_defined ? 1 : 0;
    } catch (const std::exception& e) {
      messages[idx] = e.what();
      if (messages[idx].empty()) messages[idx] = "unknown error";
    }
    if (progress) progress->fetch_add(1, std::memory_order_relaxed);
  });
  for (std::size_t idx = 0; idx < cells; ++idx)
    if (!messages[idx].empty())
      grid.errors.push_back({static_cast<int>(idx / n2), static_cast<int>(idx % n2), messages[idx]});

  grid.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  grid.runtime_per_cell = grid.wall_seconds / static_cast<double>(cells);
  return grid;
}

struct PhaseSummary {
  std::map<int, int> components;        // well-defined nu -> connected regions
  std::map<int, double> area_fraction;  // well-defined nu -> fraction of all cells
  int ill_defined_cells = 0;
  int failed_cells = 0;
  double loc_threshold = 0.0;
  // fraction of well-defined nu != 0 cells whose Loc stays below the
  // threshold, i.e. predicted edge states that are absent
  double violation_fraction = 0.0;
  double confirmed_fraction = 0.0;
};

/// Region statistics of a finished grid; regions use 4-neighbour
/// connectivity. The default threshold is 4/N.
inline PhaseSummary order_parameter_summary(const PhaseDiagramGrid& grid,
                                            std::optional<double> loc_threshold = {}) {
  PhaseSummary s;
  s.loc_threshold = loc_threshold.value_or(4.0 / grid.spec.fixed.n_atoms);
  const int n1 = grid.rows();
  const int n2 = grid.cols();
  const std::size_t cells = grid.size();

  std::vector<char> seen(cells, 0);
  std::vector<std::size_t> stack;
  int nontrivial = 0, violating = 0;
  for (std::size_t idx = 0; idx < cells; ++idx) {
    const int nu = grid.nu[idx];
    if (nu == nu_failed) {
      ++s.failed_cells;
      continue;
    }
    if (nu == nu_ill_defined) {
      ++s.ill_defined_cells;
      continue;
    }
    s.area_fraction[nu] += 1.0 / static_cast<double>(cells);
    if (nu != 0) {
      ++nontrivial;
      if (grid.loc[idx] < s.loc_threshold) ++violating;
    }
    if (seen[idx]) continue;
    ++s.components[nu];
    stack.assign(1, idx);
    seen[idx] = 1;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const int r = static_cast<int>(cur / n2);
      const int c = static_cast<int>(cur % n2);
      const int dr[4] = {-1, 1, 0, 0};
      const int dc[4] = {0, 0, -1, 1};
      for (int d = 0; d < 4; ++d) {
        const int rr = r + dr[d];
        const int cc = c + dc[d];
        if (rr < 0 || rr >= n1 || cc < 0 || cc >= n2) continue;
        const std::size_t nb = grid.index(rr, cc);
        if (!seen[nb] && grid.nu[nb] == nu) {
          seen[nb] = 1;
          stack.push_back(nb);
        }
      }
    }
  }
  if (nontrivial > 0) {
    s.violation_fraction = static_cast<double>(violating) / nontrivial;
    s.confirmed_fraction = 1.0 - s.violation_fraction;
  }
  return s;
}

}  // namespace ztopo
