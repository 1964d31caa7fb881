#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ztopo/error.hpp"

namespace ztopo::io {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

// Writes through a sibling temporary file and renames it into place, so a
// reader never sees a partially written artifact.
inline void write_atomic(const std::filesystem::path& path,
                         const std::function<void(std::ostream&)>& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  write_atomic(path, [&](std::ostream& out) { out << text; });
}

// Minimal row builder for CSV lines with %.12e floats and LF endings.
class CsvRow {
 public:
  CsvRow& operator<<(double v) { return cell(fmt(v)); }
  CsvRow& operator<<(int v) { return cell(std::to_string(v)); }
  CsvRow& operator<<(long v) { return cell(std::to_string(v)); }
  CsvRow& operator<<(std::string_view v) { return cell(std::string(v)); }
  std::string str() const { return line_ + "\n"; }

 private:
  CsvRow& cell(const std::string& s) {
    if (!first_) line_ += ',';
    line_ += s;
    first_ = false;
    return *this;
  }
  std::string line_;
  bool first_ = true;
};

inline std::ostream& operator<<(std::ostream& out, const CsvRow& row) { return out << row.str(); }

// ---------------------------------------------------------------- SVG plots

struct Rgb {
  double r, g, b;
};

// Piecewise-linear viridis approximation on [0, 1].
inline Rgb colormap(double t) {
  static constexpr std::array<Rgb, 5> stops{{{68, 1, 84},
                                             {59, 82, 139},
                                             {33, 145, 140},
                                             {94, 201, 98},
                                             {253, 231, 37}}};
  if (!std::isfinite(t)) return {200, 200, 200};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - i;
  const Rgb& a = stops[i];
  const Rgb& b = stops[i + 1];
  return {a.r + f * (b.r - a.r), a.g + f * (b.g - a.g), a.b + f * (b.b - a.b)};
}

inline std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(c.r)),
                static_cast<int>(std::lround(c.g)), static_cast<int>(std::lround(c.b)));
  return buf;
}

inline std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct HeatmapSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  // values are NaN-aware; NaN cells are drawn grey
  std::vector<double> values;  // row-major, rows along y, row 0 at y_min
  int nx = 0;
  int ny = 0;
};

inline std::string heatmap_svg(const HeatmapSpec& h) {
  constexpr double left = 70, top = 40, width = 420, height = 320, bar = 20;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : h.values)
    if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!(hi > lo)) hi = lo + 1.0;
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 110 << "\" height=\""
    << top + height + 60 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"" << left + width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(h.title) << "</text>\n";
  const double cw = width / h.nx, ch = height / h.ny;
  for (int iy = 0; iy < h.ny; ++iy) {
    for (int ix = 0; ix < h.nx; ++ix) {
      const double v = h.values[static_cast<std::size_t>(iy) * h.nx + ix];
      s << "<rect x=\"" << left + ix * cw << "\" y=\"" << top + height - (iy + 1) * ch
        << "\" width=\"" << cw + 0.05 << "\" height=\"" << ch + 0.05 << "\" fill=\""
        << hex(colormap((v - lo) / (hi - lo))) << "\"/>\n";
    }
  }
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width << "\" height=\""
    << height << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto tick = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return std::string(b);
  };
  for (int t = 0; t <= 4; ++t) {
    const double fx = t / 4.0;
    s << "<text x=\"" << left + fx * width << "\" y=\"" << top + height + 16
      << "\" text-anchor=\"middle\">" << tick(h.x_min + fx * (h.x_max - h.x_min)) << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << top + height - fx * height + 4
      << "\" text-anchor=\"end\">" << tick(h.y_min + fx * (h.y_max - h.y_min)) << "</text>\n";
  }
  s << "<text x=\"" << left + width / 2 << "\" y=\"" << top + height + 38
    << "\" text-anchor=\"middle\">" << escape_xml(h.x_label) << "</text>\n";
  s << "<text transform=\"translate(18," << top + height / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(h.y_label) << "</text>\n";
  const double bx = left + width + 20;
  for (int i = 0; i < 64; ++i) {
    s << "<rect x=\"" << bx << "\" y=\"" << top + height - (i + 1) * height / 64 << "\" width=\""
      << bar << "\" height=\"" << height / 64 + 0.05 << "\" fill=\"" << hex(colormap(i / 63.0))
      << "\"/>\n";
  }
  s << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + height << "\">" << tick(lo) << "</text>\n";
  s << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + 10 << "\">" << tick(hi) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

struct LinePlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
};

inline std::string line_svg(const LinePlotSpec& p) {
  constexpr double left = 70, top = 40, width = 420, height = 260;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    if (!std::isfinite(p.x[i]) || !std::isfinite(p.y[i])) continue;
    x0 = std::min(x0, p.x[i]), x1 = std::max(x1, p.x[i]);
    y0 = std::min(y0, p.y[i]), y1 = std::max(y1, p.y[i]);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  auto tick = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return std::string(b);
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + width + 30 << "\" height=\""
    << top + height + 60 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"" << left + width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(p.title) << "</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width << "\" height=\""
    << height << "\" fill=\"none\" stroke=\"black\"/>\n<polyline fill=\"none\" stroke=\"#3b528b\" "
    << "stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    if (!std::isfinite(p.x[i]) || !std::isfinite(p.y[i])) continue;
    s << left + (p.x[i] - x0) / (x1 - x0) * width << ','
      << top + height - (p.y[i] - y0) / (y1 - y0) * height << ' ';
  }
  s << "\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double f = t / 4.0;
    s << "<text x=\"" << left + f * width << "\" y=\"" << top + height + 16
      << "\" text-anchor=\"middle\">" << tick(x0 + f * (x1 - x0)) << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << top + height - f * height + 4
      << "\" text-anchor=\"end\">" << tick(y0 + f * (y1 - y0)) << "</text>\n";
  }
  s << "<text x=\"" << left + width / 2 << "\" y=\"" << top + height + 38
    << "\" text-anchor=\"middle\">" << escape_xml(p.x_label) << "</text>\n";
  s << "<text transform=\"translate(18," << top + height / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(p.y_label) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace ztopo::io
