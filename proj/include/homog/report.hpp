#pragma once

#include <string>
#include <vector>

namespace homog {

/// Shortest decimal string that round-trips to the same double. Integers
/// come out without an exponent ("42"), everything else in the form picked
/// by the to_chars shortest algorithm.
std::string shortest_repr(double v);

/// Plain comma-separated table with a header row. Cells are preformatted
/// strings so the writer has no formatting policy of its own; rows always
/// end in a single newline, which keeps the output byte-stable.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
  std::string to_string() const;
  void write(const std::string& path) const;
};

/// One polyline of a log-linear plot (x linear, y log10).
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // must be positive to appear
};

/// Self-contained SVG with axes, decade gridlines and one polyline per
/// series. No external renderer; meant for quick visual checks of decay
/// curves and error sweeps.
void write_svg_loglinear(const std::string& path, const std::string& title,
                         const std::vector<PlotSeries>& series);

}  // namespace homog
