// SPDX-License-Identifier: Apache-2.0
#include "obr/csvplot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace obr {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("csv: value not representable");
  return std::string(buf, ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ConfigError("csv: no column named '" + name + "'");
}

Vec CsvTable::column(const std::string& name) const {
  const std::size_t i = col(name);
  Vec out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = rows[r][i];
  return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
  if (table.columns.empty()) throw InvalidArgument("csv: no columns");
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("csv: cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    f << (i ? "," : "") << table.columns[i];
  f << '\n';
  for (const Vec& row : table.rows) {
    if (row.size() != table.columns.size())
      throw InvalidArgument("csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i)
      f << (i ? "," : "") << format_double(row[i]);
    f << '\n';
  }
  if (!f) throw ConfigError("csv: write to '" + path + "' failed");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("csv: cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(f, line) || trim(line).empty())
    throw ConfigError("csv: '" + path + "' is empty");
  table.columns = split_line(line);
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.columns.size())
      throw ConfigError("csv: ragged row in '" + path + "'");
    Vec row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), row[i]);
      if (ec != std::errc() || ptr != c.data() + c.size())
        throw ConfigError("csv: bad number '" + c + "' in '" + path + "'");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

double map_range(double v, double lo, double hi, double out_lo, double out_hi) {
  if (!(hi > lo)) throw InvalidArgument("map_range: empty input interval");
  return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
}

Vec linear_ticks(double lo, double hi, int target) {
  if (!(hi > lo) || target < 2) throw InvalidArgument("linear_ticks: bad range");
  const double raw = (hi - lo) / (target - 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = mult * mag;
    if (step >= raw) break;
  }
  Vec ticks;
  double t = std::ceil(lo / step - 1e-9) * step;
  for (; t <= hi + 1e-9 * step; t += step)
    ticks.push_back(std::fabs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

Vec log_ticks(double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo)) throw InvalidArgument("log_ticks: bad range");
  Vec ticks;
  const int e0 = static_cast<int>(std::floor(std::log10(lo) + 1e-12));
  const int e1 = static_cast<int>(std::ceil(std::log10(hi) - 1e-12));
  for (int e = e0; e <= e1; ++e) {
    const double t = std::pow(10.0, e);
    if (t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12)) ticks.push_back(t);
  }
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

namespace {

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#3a9d5d", "#8246af",
                          "#c97b1e", "#2aa198", "#6b6b6b", "#9c2f2f"};

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v, bool log_scale) {
  char buf[32];
  if (log_scale) {
    const double e = std::log10(v);
    const double er = std::round(e);
    if (std::fabs(e - er) < 1e-9 && (er < -3.0 || er > 4.0)) {
      std::snprintf(buf, sizeof(buf), "1e%d", static_cast<int>(er));
      return buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

void write_svg_plot(const std::string& path,
                    const std::vector<PlotSeries>& series,
                    const PlotOptions& opts) {
  if (series.empty()) throw InvalidArgument("svg plot: no series");
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool any = false;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw InvalidArgument("svg plot: series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = s.y[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      if (opts.log_y && !(y > 0.0)) continue;
      if (!any) {
        x_lo = x_hi = s.x[i];
        y_lo = y_hi = y;
        any = true;
      } else {
        x_lo = std::min(x_lo, s.x[i]);
        x_hi = std::max(x_hi, s.x[i]);
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
      }
    }
  }
  if (!any) throw InvalidArgument("svg plot: no plottable points");
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) {
    y_hi = opts.log_y ? y_lo * 10.0 : y_lo + 1.0;
    if (!opts.log_y) y_lo -= 1.0;
  }
  if (!opts.log_y) {
    const double pad = 0.04 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  const double w = opts.width, h = opts.height;
  const double ml = 78, mr = 24, mt = opts.title.empty() ? 24 : 48, mb = 58;
  const auto px = [&](double x) { return map_range(x, x_lo, x_hi, ml, w - mr); };
  const auto py = [&](double y) {
    if (opts.log_y)
      return map_range(std::log10(y), std::log10(y_lo), std::log10(y_hi),
                       h - mb, mt);
    return map_range(y, y_lo, y_hi, h - mb, mt);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
      << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width
      << " " << opts.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">\n";
  if (!opts.title.empty())
    out << "<text x=\"" << w / 2 << "\" y=\"26\" text-anchor=\"middle\" "
           "font-size=\"15\">" << svg_escape(opts.title) << "</text>\n";

  const Vec xticks = linear_ticks(x_lo, x_hi, 7);
  const Vec yticks = opts.log_y ? log_ticks(y_lo, y_hi)
                                : linear_ticks(y_lo, y_hi, 7);
  char num[64];
  for (double t : xticks) {
    const double X = px(t);
    out << "<line x1=\"" << X << "\" y1=\"" << mt << "\" x2=\"" << X
        << "\" y2=\"" << h - mb << "\" stroke=\"#ddd\"/>\n";
    std::snprintf(num, sizeof(num), "%g", t);
    out << "<text x=\"" << X << "\" y=\"" << h - mb + 18
        << "\" text-anchor=\"middle\">" << num << "</text>\n";
  }
  for (double t : yticks) {
    const double Y = py(t);
    out << "<line x1=\"" << ml << "\" y1=\"" << Y << "\" x2=\"" << w - mr
        << "\" y2=\"" << Y << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << Y + 4
        << "\" text-anchor=\"end\">" << tick_label(t, opts.log_y)
        << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
      << "\" height=\"" << h - mt - mb
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  if (!opts.x_label.empty())
    out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 14
        << "\" text-anchor=\"middle\">" << svg_escape(opts.x_label)
        << "</text>\n";
  if (!opts.y_label.empty())
    out << "<text x=\"20\" y=\"" << (mt + h - mb) / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << (mt + h - mb) / 2 << ")\">" << svg_escape(opts.y_label)
        << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::ostringstream pts;
    bool open = false;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double xv = series[s].x[i], yv = series[s].y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv) ||
          (opts.log_y && !(yv > 0.0))) {
        open = false;
        continue;
      }
      pts << (open ? " L" : " M") << px(xv) << ' ' << py(yv);
      open = true;
    }
    out << "<path d=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"/>\n";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double xv = series[s].x[i], yv = series[s].y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv) ||
          (opts.log_y && !(yv > 0.0)))
        continue;
      out << "<circle cx=\"" << px(xv) << "\" cy=\"" << py(yv)
          << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
    }
  }

  // Legend, top right inside the frame.
  const double lx = w - mr - 190, ly = mt + 12;
  out << "<rect x=\"" << lx - 8 << "\" y=\"" << ly - 12 << "\" width=\"190\" "
      << "height=\"" << 18 * series.size() + 8
      << "\" fill=\"#ffffff\" fill-opacity=\"0.85\" stroke=\"#bbb\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const double Y = ly + 18 * static_cast<double>(s);
    out << "<line x1=\"" << lx << "\" y1=\"" << Y - 4 << "\" x2=\"" << lx + 26
        << "\" y2=\"" << Y - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << lx + 32 << "\" y=\"" << Y << "\">"
        << svg_escape(series[s].label) << "</text>\n";
  }
  out << "</g>\n</svg>\n";

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("svg plot: cannot open '" + path + "'");
  f << out.str();
  if (!f) throw ConfigError("svg plot: write to '" + path + "' failed");
}

}  // namespace obr
