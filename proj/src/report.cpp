#include "homog/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace homog {

std::string shortest_repr(double v) {
  if (v == 0.0) return "0";  // merge -0 into 0 for stable output
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size())
    throw std::invalid_argument("csv row width does not match the header");
  rows.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

void CsvTable::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << to_string();
  if (!f) throw std::runtime_error("write failed: " + path);
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#7f7f7f"};

double map_range(double v, double lo, double hi, double out_lo, double out_hi) {
  if (hi <= lo) return 0.5 * (out_lo + out_hi);
  return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
}

}  // namespace

void write_svg_loglinear(const std::string& path, const std::string& title,
                         const std::vector<PlotSeries>& series) {
  double xmin = 0, xmax = 1, lymin = 0, lymax = 1;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0.0)) continue;
      const double ly = std::log10(s.y[i]);
      if (!any) {
        xmin = xmax = s.x[i];
        lymin = lymax = ly;
        any = true;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        lymin = std::min(lymin, ly);
        lymax = std::max(lymax, ly);
      }
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  lymin = std::floor(lymin - 1e-9);
  lymax = std::ceil(lymax + 1e-9);
  if (lymax <= lymin) lymax = lymin + 1;

  const double x0 = 70, x1 = 600, y0 = 430, y1 = 40;  // plot frame, y grows up
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "font-family=\"monospace\" font-size=\"12\">\n";
  svg << "<text x=\"70\" y=\"20\">" << title << "</text>\n";
  svg << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << (x1 - x0) << "\" height=\""
      << (y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int d = static_cast<int>(lymin); d <= static_cast<int>(lymax); ++d) {
    const double y = map_range(d, lymin, lymax, y0, y1);
    svg << "<line x1=\"" << x0 << "\" y1=\"" << shortest_repr(y) << "\" x2=\"" << x1 << "\" y2=\""
        << shortest_repr(y) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"8\" y=\"" << shortest_repr(y + 4) << "\">1e" << d << "</text>\n";
  }
  const int xticks = std::min(10, static_cast<int>(xmax - xmin) > 0
                                      ? static_cast<int>(xmax - xmin)
                                      : 1);
  for (int t = 0; t <= xticks; ++t) {
    const double xv = xmin + (xmax - xmin) * t / xticks;
    const double x = map_range(xv, xmin, xmax, x0, x1);
    svg << "<line x1=\"" << shortest_repr(x) << "\" y1=\"" << y0 << "\" x2=\"" << shortest_repr(x)
        << "\" y2=\"" << (y0 + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << shortest_repr(x - 8) << "\" y=\"" << (y0 + 20) << "\">"
        << shortest_repr(xv) << "</text>\n";
  }

  int color = 0;
  for (const auto& s : series) {
    const char* c = kPalette[color % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0.0)) continue;
      if (!first) svg << ' ';
      svg << shortest_repr(map_range(s.x[i], xmin, xmax, x0, x1)) << ','
          << shortest_repr(map_range(std::log10(s.y[i]), lymin, lymax, y0, y1));
      first = false;
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << (x1 - 180) << "\" y=\"" << (y1 + 16 + 14 * color) << "\" fill=\"" << c
        << "\">" << s.name << "</text>\n";
    ++color;
  }
  svg << "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << svg.str();
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace homog
