#pragma once

// Command-line front end. Needs the vendored CLI11 and nlohmann/json headers
// on the include path (target ztopo_vendor).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ztopo/ztopo.hpp"

namespace ztopo::cli {

using json = nlohmann::ordered_json;

enum class KeyType { integer, real, boolean, text };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* help;
};

inline const std::vector<KeySpec>& parameter_keys() {
  static const std::vector<KeySpec> keys{
      {"n", KeyType::integer, "number of atoms (even)"},
      {"a", KeyType::real, "lattice constant in units of lambda0"},
      {"shift_x", KeyType::real, "x displacement of the B sublattice, units of a"},
      {"shift_y", KeyType::real, "y displacement of the B sublattice, units of a"},
      {"delta0", KeyType::real, "staggered potential amplitude, units of Gamma0"},
      {"phi", KeyType::real, "polarization angle (rad)"},
      {"phi_min", KeyType::real, "first polarization sample (rad)"},
      {"phi_max", KeyType::real, "last polarization sample (rad)"},
      {"phi_count", KeyType::integer, "number of polarization samples"},
      {"strip", KeyType::boolean, "drop A-A and B-B couplings (chiral model)"},
      {"k_points", KeyType::integer, "Brillouin-zone samples"},
      {"cutoff", KeyType::integer, "lattice-sum cutoff in unit cells"},
      {"axis1", KeyType::text, "first sweep axis, name:start:stop:count"},
      {"axis2", KeyType::text, "second sweep axis, name:start:stop:count"},
      {"nk", KeyType::integer, "k samples of the synthetic torus"},
      {"nphi", KeyType::integer, "phi samples of the synthetic torus"},
      {"plots", KeyType::boolean, "also write SVG plots"},
  };
  return keys;
}

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"spectrum", "edge-profile", "phase-diagram", "bloch",
                                          "synthetic"};
  return c;
}

inline json default_parameters(const std::string& command) {
  json p;
  p["n"] = 50;
  p["a"] = command == "phase-diagram" ? 0.35 : 0.3;
  p["shift_x"] = 0.0;
  p["shift_y"] = 0.0;
  p["delta0"] = command == "synthetic" ? 1.0 : 0.0;
  p["cutoff"] = default_cutoff_cells;
  if (command == "spectrum" || command == "bloch") {
    p["phi_min"] = -pi / 2;
    p["phi_max"] = pi / 2;
    p["phi_count"] = 101;
    if (command == "bloch") p["k_points"] = 256;
  }
  if (command == "spectrum" || command == "edge-profile") p["strip"] = false;
  if (command == "edge-profile") p["phi"] = -pi / 4;
  if (command == "phase-diagram") {
    p["phi"] = 0.0;
    p["axis1"] = "phi:-1.5708:1.5708:201";
    p["axis2"] = "shift_y:-0.5:0.5:201";
    p["k_points"] = default_k_points;
  }
  if (command == "synthetic") {
    p["nk"] = 256;
    p["nphi"] = 256;
  }
  p["plots"] = false;
  return p;
}

struct RunConfig {
  std::string command;
  json parameters;  // fully resolved, typed
  std::filesystem::path output_dir = ".";
  int jobs = 1;
  bool seedless = true;  // nothing in the pipeline draws random numbers

  double real(const char* key) const { return parameters.at(key).get<double>(); }
  int integer(const char* key) const { return parameters.at(key).get<int>(); }
  bool flag(const char* key) const { return parameters.at(key).get<bool>(); }
  std::string text(const char* key) const { return parameters.at(key).get<std::string>(); }
};

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1] ? 1u : 0u)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::string suggest(std::string_view key, const std::vector<std::string>& known) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& k : known) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) best_d = d, best = k;
  }
  return best_d <= std::max<std::size_t>(2, key.size() / 3) ? best : std::string{};
}

inline UsageError unknown_key(const std::string& key, const std::vector<std::string>& known,
                              const std::string& prefix) {
  std::string msg = "unknown key '" + prefix + key + "'";
  const std::string s = suggest(key, known);
  if (!s.empty()) msg += "; did you mean '" + prefix + s + "'?";
  return UsageError(msg);
}

inline std::vector<std::string> applicable_keys(const std::string& command) {
  std::vector<std::string> out;
  const json defaults = default_parameters(command);
  for (const auto& [key, value] : defaults.items()) out.push_back(key);
  return out;
}

inline json coerce(const KeySpec& spec, const json& value, const std::string& origin) {
  auto fail = [&](const char* want) {
    return ValidationError(std::string(spec.name) + " must be " + want + " (from " + origin + ")");
  };
  switch (spec.type) {
    case KeyType::integer:
      if (value.is_number_integer()) return value;
      if (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>())
        return static_cast<long long>(value.get<double>());
      throw fail("an integer");
    case KeyType::real:
      if (value.is_number()) return value.get<double>();
      throw fail("a number");
    case KeyType::boolean:
      if (value.is_boolean()) return value;
      throw fail("true or false");
    case KeyType::text:
      if (value.is_string()) return value;
      throw fail("a string");
  }
  return value;
}

inline json parse_flag_value(const KeySpec& spec, const std::string& raw) {
  try {
    std::size_t used = 0;
    switch (spec.type) {
      case KeyType::integer: {
        const long long v = std::stoll(raw, &used);
        if (used == raw.size()) return v;
        break;
      }
      case KeyType::real: {
        const double v = std::stod(raw, &used);
        if (used == raw.size()) return v;
        break;
      }
      case KeyType::boolean:
        if (raw == "true" || raw == "1") return true;
        if (raw == "false" || raw == "0") return false;
        break;
      case KeyType::text:
        return raw;
    }
  } catch (const std::logic_error&) {
  }
  throw ValidationError("cannot parse '" + raw + "' for --" + spec.name);
}

inline void validate(const RunConfig& c) {
  const json& p = c.parameters;
  auto finite = [&](const char* key) {
    if (p.contains(key) && !std::isfinite(p[key].get<double>()))
      throw ValidationError(std::string(key) + " must be finite");
  };
  for (const char* key : {"a", "shift_x", "shift_y", "delta0", "phi", "phi_min", "phi_max"})
    finite(key);
  if (c.integer("n") < 2 || c.integer("n") % 2 != 0)
    throw ValidationError("n_atoms must be even and >= 2");
  if (!(c.real("a") > 0.0)) throw ValidationError("lattice_const must be > 0");
  if (c.integer("cutoff") < 1) throw ValidationError("cutoff must be >= 1");
  if (p.contains("phi_count") && c.integer("phi_count") < 1)
    throw ValidationError("phi_count must be >= 1");
  if (p.contains("k_points") && c.integer("k_points") < 64)
    throw ValidationError("k_points must be >= 64");
  for (const char* key : {"nk", "nphi"})
    if (p.contains(key) && c.integer(key) < 64)
      throw ValidationError(std::string(key) + " must be >= 64");
  if (c.command == "synthetic" && c.real("delta0") == 0.0)
    throw ValidationError("delta0 must be nonzero for the synthetic dimension");
  if (c.jobs < 1) throw ValidationError("jobs must be >= 1");
  if (c.command == "phase-diagram") {
    SweepSpec spec;
    spec.axis1 = SweepAxis::parse(c.text("axis1"));
    spec.axis2 = SweepAxis::parse(c.text("axis2"));
    spec.fixed.n_atoms = c.integer("n");
    spec.fixed.lattice_const = c.real("a");
    spec.fixed.k_points = c.integer("k_points");
    spec.fixed.cutoff_cells = c.integer("cutoff");
    spec.validate();
  }
}

inline const KeySpec* find_key(std::string_view name) {
  for (const auto& k : parameter_keys())
    if (name == k.name) return &k;
  return nullptr;
}

/// Resolves defaults <- config file <- flags. `args` excludes the program
/// name. Throws UsageError for unknown keys and ValidationError for values
/// outside their domain. Throws CLI::CallForHelp / CLI::CallForVersion
/// when help or the version was requested.
inline RunConfig parse_config(std::vector<std::string> args,
                              std::optional<std::filesystem::path> config_file = {}) {
  CLI::App app{"Polarization-dependent topology of dipole-coupled zigzag chains", "ztopo"};
  app.allow_extras();
  app.set_version_flag("--version", std::string(version));
  std::string command;
  std::string config_path;
  std::string output;
  int jobs = 0;
  app.add_option("command", command, "spectrum | edge-profile | phase-diagram | bloch | synthetic");
  app.add_option("--config", config_path, "JSON config or manifest file");
  auto* out_opt = app.add_option("-o,--output", output, "output directory");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads (default: ZTOPO_JOBS or cores)");
  std::vector<std::pair<const KeySpec*, CLI::Option*>> flag_opts;
  std::vector<std::string> raw(parameter_keys().size());
  for (std::size_t i = 0; i < parameter_keys().size(); ++i) {
    const KeySpec& k = parameter_keys()[i];
    CLI::Option* o = k.type == KeyType::boolean
                         ? app.add_flag(std::string("--") + k.name, k.help)
                         : app.add_option(std::string("--") + k.name, raw[i], k.help);
    flag_opts.emplace_back(&k, o);
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::CallForVersion&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  std::vector<std::string> known_flags;
  for (const auto& k : parameter_keys()) known_flags.emplace_back(k.name);
  for (const char* extra : {"config", "output", "jobs", "help", "version"})
    known_flags.emplace_back(extra);
  for (const std::string& extra : app.remaining()) {
    if (extra.rfind("--", 0) == 0) {
      const std::string name = extra.substr(2, extra.find('=') - 2);
      throw unknown_key(name, known_flags, "--");
    }
    throw UsageError("unexpected argument '" + extra + "'");
  }

  if (!config_path.empty()) config_file = config_path;
  json file_values = json::object();
  std::optional<std::string> file_output;
  std::optional<int> file_jobs;
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw UsageError("cannot read config file " + config_file->string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("config file " + config_file->string() + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
    std::vector<std::string> known_top{"command", "parameters", "output_dir", "jobs", "tool",
                                       "version", "seedless", "timings", "results"};
    for (const auto& k : parameter_keys()) known_top.emplace_back(k.name);
    for (const auto& [key, value] : doc.items()) {
      if (std::find(known_top.begin(), known_top.end(), key) == known_top.end())
        throw unknown_key(key, known_top, "");
      if (key == "command") {
        if (command.empty()) command = value.get<std::string>();
      } else if (key == "output_dir") {
        file_output = value.get<std::string>();
      } else if (key == "jobs") {
        file_jobs = value.get<int>();
      } else if (key == "parameters") {
        if (!value.is_object()) throw UsageError("'parameters' must be an object");
        for (const auto& [pk, pv] : value.items()) {
          if (!find_key(pk)) throw unknown_key(pk, known_flags, "");
          file_values[pk] = pv;
        }
      } else if (find_key(key)) {
        file_values[key] = value;
      }
    }
  }

  if (command.empty()) throw UsageError("no command given (" + CLI::detail::join(commands(), ", ") + ")");
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    std::string msg = "unknown command '" + command + "'";
    const std::string s = suggest(command, commands());
    if (!s.empty()) msg += "; did you mean '" + s + "'?";
    throw UsageError(msg);
  }

  RunConfig c;
  c.command = command;
  c.parameters = default_parameters(command);
  const std::vector<std::string> allowed = applicable_keys(command);
  auto assign = [&](const std::string& key, const json& value, const std::string& origin) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw UsageError("key '" + key + "' does not apply to " + command);
    c.parameters[key] = coerce(*find_key(key), value, origin);
  };
  for (const auto& [key, value] : file_values.items()) assign(key, value, "config file");
  for (std::size_t i = 0; i < flag_opts.size(); ++i) {
    const auto& [spec, opt] = flag_opts[i];
    if (opt->count() == 0) continue;
    assign(spec->name, spec->type == KeyType::boolean ? json(true) : parse_flag_value(*spec, raw[i]),
           "command line");
  }

  c.output_dir = out_opt->count() ? output : file_output.value_or(".");
  c.jobs = jobs_opt->count() ? jobs : file_jobs.value_or(default_jobs());
  validate(c);
  return c;
}

struct Outcome {
  int exit_code = 0;
  json results = json::object();
  json timings = json::object();
};

inline json manifest(const RunConfig& c, const Outcome& o) {
  json m;
  m["tool"] = "ztopo";
  m["version"] = version;
  m["command"] = c.command;
  m["seedless"] = c.seedless;
  m["parameters"] = c.parameters;
  m["jobs"] = c.jobs;
  m["output_dir"] = c.output_dir.string();
  m["results"] = o.results;
  m["timings"] = o.timings;
  return m;
}

inline ChainGeometry geometry_of(const RunConfig& c) {
  return build_chain(c.integer("n"), c.real("a"), c.real("shift_x"), c.real("shift_y"));
}

inline std::vector<double> phi_samples(const RunConfig& c) {
  const int n = c.integer("phi_count");
  const double lo = c.real("phi_min"), hi = c.real("phi_max");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

inline SpectrumResult spectrum_at(const ChainGeometry& g, double phi, double delta0, bool strip) {
  const CouplingMatrices cm = build_coupling_matrices(g, {phi});
  RealSpaceHamiltonian h =
      build_hamiltonian(cm, delta0 != 0.0 ? std::optional<double>(delta0) : std::nullopt);
  if (strip) {
    if (h.staggered) throw ValidationError("strip cannot be combined with delta0 != 0");
    h = strip_intrasublattice(h, g);
  }
  return diagonalize(h);
}

inline Outcome run_spectrum(const RunConfig& c) {
  const ChainGeometry g = geometry_of(c);
  const std::vector<double> phis = phi_samples(c);
  std::vector<std::string> spec_rows(phis.size()), edge_rows(phis.size());
  std::vector<double> loc(phis.size());
  parallel_for(phis.size(), c.jobs, [&](std::size_t p) {
    const SpectrumResult s = spectrum_at(g, phis[p], c.real("delta0"), c.flag("strip"));
    std::string& out = spec_rows[p];
    for (Eigen::Index m = 0; m < s.size(); ++m)
      out += (io::CsvRow() << phis[p] << static_cast<int>(m + 1) << s.eigenvalues(m) << s.ipr(m))
                 .str();
    const EdgeProfile e = edge_profile(s);
    for (Eigen::Index i = 0; i < e.populations.size(); ++i)
      edge_rows[p] += (io::CsvRow() << phis[p] << static_cast<int>(i + 1) << e.populations(i)).str();
    loc[p] = s.loc;
  });
  io::write_atomic(c.output_dir / "spectrum.csv", [&](std::ostream& out) {
    out << "phi,index,omega_minus_omega0,ipr\n";
    for (const auto& r : spec_rows) out << r;
  });
  io::write_atomic(c.output_dir / "edge_profile.csv", [&](std::ostream& out) {
    out << "phi,site,population\n";
    for (const auto& r : edge_rows) out << r;
  });
  if (c.flag("plots")) {
    io::LinePlotSpec plot{"Maximal IPR", "phi / pi", "Loc", {}, loc};
    for (double p : phis) plot.x.push_back(p / pi);
    io::write_text(c.output_dir / "spectrum_loc.svg", io::line_svg(plot));
  }
  Outcome o;
  o.results["phi_samples"] = phis.size();
  o.results["max_loc"] = *std::max_element(loc.begin(), loc.end());
  return o;
}

inline Outcome run_edge_profile(const RunConfig& c) {
  const ChainGeometry g = geometry_of(c);
  const double phi = c.real("phi");
  const SpectrumResult s = spectrum_at(g, phi, c.real("delta0"), c.flag("strip"));
  const EdgeProfile e = edge_profile(s);
  io::write_atomic(c.output_dir / "edge_profile.csv", [&](std::ostream& out) {
    out << "phi,site,population\n";
    for (Eigen::Index i = 0; i < e.populations.size(); ++i)
      out << (io::CsvRow() << phi << static_cast<int>(i + 1) << e.populations(i));
  });
  Outcome o;
  o.results["state_index"] = e.state_index + 1;
  o.results["eigenvalue"] = s.eigenvalues(e.state_index);
  o.results["boundary_weight"] = boundary_weight(s.eigenvectors.col(e.state_index));
  o.results["tie"] = e.tie;
  return o;
}

inline std::string axis_label(SweepParameter p) {
  switch (p) {
    case SweepParameter::phi: return "phi / pi";
    case SweepParameter::shift_x: return "Delta x / a";
    case SweepParameter::shift_y: return "Delta y / a";
    case SweepParameter::shift_diag: return "Delta x = Delta y (units of a)";
    case SweepParameter::lattice_const: return "a / lambda0";
    case SweepParameter::delta0: return "Delta0 / Gamma0";
  }
  return "";
}

inline double axis_display(SweepParameter p, double v) { return p == SweepParameter::phi ? v / pi : v; }

inline Outcome run_phase_diagram(const RunConfig& c, std::ostream& log) {
  SweepSpec spec;
  spec.axis1 = SweepAxis::parse(c.text("axis1"));
  spec.axis2 = SweepAxis::parse(c.text("axis2"));
  spec.fixed.n_atoms = c.integer("n");
  spec.fixed.lattice_const = c.real("a");
  spec.fixed.shift_x = c.real("shift_x");
  spec.fixed.shift_y = c.real("shift_y");
  spec.fixed.phi = c.real("phi");
  spec.fixed.delta0 = c.real("delta0");
  spec.fixed.k_points = c.integer("k_points");
  spec.fixed.cutoff_cells = c.integer("cutoff");

  const PhaseDiagramGrid grid = run_sweep(spec, c.jobs);
  auto write_grid = [&](const char* name, auto value) {
    io::write_atomic(c.output_dir / name, [&](std::ostream& out) {
      out << "axis1,axis2,value\n";
      for (int i1 = 0; i1 < grid.rows(); ++i1)
        for (int i2 = 0; i2 < grid.cols(); ++i2) {
          io::CsvRow row;
          row << spec.axis1.value(i1) << spec.axis2.value(i2);
          value(row, grid.index(i1, i2));
          out << row;
        }
    });
  };
  write_grid("phase_nu.csv", [&](io::CsvRow& r, std::size_t i) { r << grid.nu[i]; });
  write_grid("phase_loc.csv", [&](io::CsvRow& r, std::size_t i) { r << grid.loc[i]; });
  if (!grid.errors.empty()) {
    io::write_atomic(c.output_dir / "phase_errors.csv", [&](std::ostream& out) {
      out << "axis1,axis2,message\n";
      for (const CellError& e : grid.errors) {
        std::string msg = e.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        out << (io::CsvRow() << spec.axis1.value(e.i1) << spec.axis2.value(e.i2) << msg);
      }
    });
  }
  if (c.flag("plots")) {
    auto heat = [&](const char* title, auto value) {
      io::HeatmapSpec h;
      h.title = title;
      // axis1 runs along the horizontal direction
      h.x_label = axis_label(spec.axis1.parameter);
      h.y_label = axis_label(spec.axis2.parameter);
      h.x_min = axis_display(spec.axis1.parameter, spec.axis1.start);
      h.x_max = axis_display(spec.axis1.parameter, spec.axis1.stop);
      h.y_min = axis_display(spec.axis2.parameter, spec.axis2.start);
      h.y_max = axis_display(spec.axis2.parameter, spec.axis2.stop);
      h.nx = grid.rows();
      h.ny = grid.cols();
      for (int i2 = 0; i2 < grid.cols(); ++i2)
        for (int i1 = 0; i1 < grid.rows(); ++i1) h.values.push_back(value(grid.index(i1, i2)));
      return io::heatmap_svg(h);
    };
    io::write_text(c.output_dir / "phase_nu.svg", heat("Winding number", [&](std::size_t i) {
                     const int nu = grid.nu[i];
                     return nu == nu_failed || nu == nu_ill_defined
                                ? std::numeric_limits<double>::quiet_NaN()
                                : static_cast<double>(nu);
                   }));
    io::write_text(c.output_dir / "phase_loc.svg",
                   heat("Maximal IPR", [&](std::size_t i) { return grid.loc[i]; }));
  }

  const PhaseSummary summary = order_parameter_summary(grid);
  Outcome o;
  o.exit_code = grid.errors.empty() ? 0 : 1;
  json comps = json::object(), area = json::object();
  for (const auto& [nu, n] : summary.components) comps[std::to_string(nu)] = n;
  for (const auto& [nu, f] : summary.area_fraction) area[std::to_string(nu)] = f;
  o.results["cells"] = grid.size();
  o.results["components"] = comps;
  o.results["area_fraction"] = area;
  o.results["ill_defined_cells"] = summary.ill_defined_cells;
  o.results["failed_cells"] = summary.failed_cells;
  o.results["loc_threshold"] = summary.loc_threshold;
  o.results["violation_fraction"] = summary.violation_fraction;
  o.results["confirmed_fraction"] = summary.confirmed_fraction;
  o.timings["runtime_per_cell_seconds"] = grid.runtime_per_cell;
  if (!grid.errors.empty())
    log << grid.errors.size() << " cell(s) failed; see phase_errors.csv\n";
  return o;
}

inline Outcome run_bloch(const RunConfig& c) {
  const ChainGeometry g = geometry_of(c);
  const BlochLatticeSums sums(g, c.integer("k_points"), c.integer("cutoff"));
  const std::vector<double> phis = phi_samples(c);
  const double delta0 = c.real("delta0");
  io::write_atomic(c.output_dir / "bloch_bands.csv", [&](std::ostream& out) {
    out << "k,phi,d0,dx,dy,dz,omega_minus,omega_plus\n";
    for (double phi : phis)
      for (int n = 0; n < c.integer("k_points"); ++n) {
        const BlochVector v = sums.at(n, phi, delta0);
        out << (io::CsvRow() << v.k << phi << v.d0 << v.d.x() << v.d.y() << v.d.z()
                             << v.omega_minus() << v.omega_plus());
      }
  });
  Outcome o;
  o.results["rows"] = phis.size() * static_cast<std::size_t>(c.integer("k_points"));
  return o;
}

inline Outcome run_synthetic(const RunConfig& c) {
  const ChainGeometry g = geometry_of(c);
  const SyntheticBandGrid grid =
      berry_curvature_grid(g, c.real("delta0"), c.integer("nk"), c.integer("nphi"), c.integer("cutoff"));
  const PumpResult pump = pump_displacement(grid);
  auto write_kphi = [&](const char* name, const char* header, const std::vector<double>& ks,
                        const std::vector<double>& phis, const Eigen::MatrixXd& m1,
                        const Eigen::MatrixXd& m2) {
    io::write_atomic(c.output_dir / name, [&](std::ostream& out) {
      out << header << '\n';
      for (int i = 0; i < grid.nk; ++i)
        for (int j = 0; j < grid.nphi; ++j)
          out << (io::CsvRow() << ks[i] << phis[j] << m1(i, j) << m2(i, j));
    });
  };
  write_kphi("bands.csv", "k,phi,omega_minus,omega_plus", grid.k, grid.phi, grid.omega_minus,
             grid.omega_plus);
  write_kphi("berry.csv", "k,phi,F_minus,F_plus", grid.berry_k, grid.berry_phi, grid.berry_minus,
             grid.berry_plus);
  write_kphi("decay.csv", "k,phi,gamma_minus,gamma_plus", grid.k, grid.phi, grid.gamma_minus,
             grid.gamma_plus);
  io::write_atomic(c.output_dir / "pump.csv", [&](std::ostream& out) {
    out << "k,displacement\n";
    for (int i = 0; i < grid.nk; ++i) out << (io::CsvRow() << pump.k[i] << pump.displacement[i]);
  });

  double max_abs = 0.0;
  for (double d : pump.displacement) max_abs = std::max(max_abs, std::abs(d));
  json summary;
  summary["chern_minus"] = pump.chern_minus;
  summary["chern_plus"] = pump.chern_plus;
  summary["chern_minus_raw"] = pump.chern_minus_raw;
  summary["chern_plus_raw"] = pump.chern_plus_raw;
  summary["min_gap"] = grid.min_gap;
  summary["max_abs_displacement"] = max_abs;
  io::write_text(c.output_dir / "synthetic_summary.json", summary.dump(2) + "\n");

  if (c.flag("plots")) {
    const double ka = pi / g.lattice_const;
    auto heat = [&](const char* title, const Eigen::MatrixXd& m) {
      io::HeatmapSpec h{title, "a k / pi", "phi / pi", -1.0, 1.0, -0.5, 0.5, {}, grid.nk, grid.nphi};
      for (int j = 0; j < grid.nphi; ++j)
        for (int i = 0; i < grid.nk; ++i) h.values.push_back(m(i, j));
      return io::heatmap_svg(h);
    };
    io::write_text(c.output_dir / "bands_minus.svg", heat("Lower band (Gamma0)", grid.omega_minus));
    io::write_text(c.output_dir / "bands_plus.svg", heat("Upper band (Gamma0)", grid.omega_plus));
    io::write_text(c.output_dir / "berry_minus.svg", heat("Berry curvature, lower band", grid.berry_minus));
    io::write_text(c.output_dir / "decay_minus.svg", heat("Decay rate, lower band", grid.gamma_minus));
    io::LinePlotSpec line{"Pumped displacement", "a k / pi", "Delta x (unit cells)", {}, pump.displacement};
    for (double k : pump.k) line.x.push_back(k / ka);
    io::write_text(c.output_dir / "pump.svg", io::line_svg(line));
  }
  Outcome o;
  o.results = summary;
  return o;
}

/// Dispatches a resolved configuration. Returns 0 on success, 1 when some
/// sweep cells failed (recorded in phase_errors.csv), 2 on fatal errors.
inline int run(const RunConfig& c, std::ostream& log = std::cerr) {
  try {
    std::filesystem::create_directories(c.output_dir);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    if (c.command == "spectrum") o = run_spectrum(c);
    else if (c.command == "edge-profile") o = run_edge_profile(c);
    else if (c.command == "phase-diagram") o = run_phase_diagram(c, log);
    else if (c.command == "bloch") o = run_bloch(c);
    else if (c.command == "synthetic") o = run_synthetic(c);
    else throw UsageError("unknown command '" + c.command + "'");
    o.timings["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    io::write_text(c.output_dir / "manifest.json", manifest(c, o).dump(2) + "\n");
    return o.exit_code;
  } catch (const std::exception& e) {
    log << "ztopo: error: " << e.what() << '\n';
    return 2;
  }
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig config;
  try {
    config = parse_config(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << "usage: ztopo <command> [--config file.json] [-o dir] [--jobs N] [--key value ...]\n"
              << "commands: " << CLI::detail::join(commands(), ", ") << "\nkeys:\n";
    for (const auto& k : parameter_keys()) std::cout << "  --" << k.name << "  " << k.help << '\n';
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << version << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "ztopo: " << e.what() << '\n';
    return 2;
  }
  return run(config);
}

}  // namespace ztopo::cli
