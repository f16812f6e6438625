// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "obr/common.hpp"
#include "obr/linalg.hpp"

namespace obr {

// Numeric table with a header row. Cells are written with shortest
// round-trip formatting and a '.' decimal separator regardless of locale.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<Vec> rows;

  std::size_t col(const std::string& name) const;
  Vec column(const std::string& name) const;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

struct PlotSeries {
  std::string label;
  Vec x;
  Vec y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 840;
  int height = 560;
};

// Self-contained SVG line chart, one polyline per series plus markers.
void write_svg_plot(const std::string& path,
                    const std::vector<PlotSeries>& series,
                    const PlotOptions& opts);

// Exposed for tests: tick selection and coordinate mapping.
Vec linear_ticks(double lo, double hi, int target);
Vec log_ticks(double lo, double hi);
double map_range(double v, double lo, double hi, double out_lo, double out_hi);

}  // namespace obr
