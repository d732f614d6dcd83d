#include "nsclust/svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include "nsclust/errors.hpp"

namespace nsclust {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
                                                 "#17becf", "#8c564b", "#e377c2", "#bcbd22"};
constexpr const char* kNoiseColor = "#b0b0b0";
constexpr const char* kOutlierColor = "#d62728";

constexpr double kPanel = 440.0;
constexpr double kMargin = 40.0;
constexpr double kHeight = kPanel + 2 * kMargin + 20.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

const char* cluster_color(std::size_t j) { return kPalette[j % kPalette.size()]; }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 0-based main cluster of a "C<j>" verdict.
std::size_t main_cluster(const std::string& verdict) {
  return static_cast<std::size_t>(std::stoul(verdict.substr(1)) - 1);
}

void scatter_panel(std::ostringstream& out, const PlotData& data, double x0) {
  double lo_x = data.points.front().coords[0], hi_x = lo_x;
  double lo_y = data.points.front().coords[1], hi_y = lo_y;
  auto grow = [&](const std::vector<double>& p) {
    lo_x = std::min(lo_x, p[0]);
    hi_x = std::max(hi_x, p[0]);
    lo_y = std::min(lo_y, p[1]);
    hi_y = std::max(hi_y, p[1]);
  };
  for (const auto& p : data.points) grow(p.coords);
  for (const auto& c : data.centroids) grow(c);
  // Equal scale on both axes so distances are not distorted.
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double cx = (lo_x + hi_x) / 2;
  const double cy = (lo_y + hi_y) / 2;
  const double scale = (kPanel - 20.0) / span;
  auto sx = [&](double x) { return x0 + kPanel / 2 + (x - cx) * scale; };
  auto sy = [&](double y) { return kMargin + kPanel / 2 - (y - cy) * scale; };

  out << "<g id=\"scatter\">\n";
  out << "<rect x=\"" << num(x0) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(kPanel)
      << "\" height=\"" << num(kPanel) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const auto& p = data.points[i];
    const std::string x = num(sx(p.coords[0]));
    const std::string y = num(sy(p.coords[1]));
    if (p.verdict == "outlier") {
      const double px = sx(p.coords[0]);
      const double py = sy(p.coords[1]);
      out << "<path d=\"M" << num(px - 5) << ' ' << num(py - 5) << " L" << num(px + 5) << ' '
          << num(py + 5) << " M" << num(px - 5) << ' ' << num(py + 5) << " L" << num(px + 5)
          << ' ' << num(py - 5) << "\" stroke=\"" << kOutlierColor
          << "\" stroke-width=\"2\"><title>" << i + 1 << " outlier</title></path>\n";
    } else if (p.verdict.rfind("boundary", 0) == 0) {
      const double px = sx(p.coords[0]);
      const double py = sy(p.coords[1]);
      out << "<polygon points=\"" << num(px) << ',' << num(py - 6) << ' ' << num(px + 6) << ','
          << num(py) << ' ' << num(px) << ',' << num(py + 6) << ' ' << num(px - 6) << ','
          << num(py) << "\" fill=\"#ffd700\" stroke=\"#000\"><title>" << i + 1 << ' '
          << escape(p.verdict) << "</title></polygon>\n";
    } else {
      out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"4\" fill=\""
          << cluster_color(main_cluster(p.verdict)) << "\"><title>" << i + 1 << ' '
          << escape(p.verdict) << "</title></circle>\n";
    }
  }
  for (std::size_t j = 0; j < data.centroids.size(); ++j) {
    const double px = sx(data.centroids[j][0]);
    const double py = sy(data.centroids[j][1]);
    out << "<path d=\"M" << num(px - 8) << ' ' << num(py) << " L" << num(px + 8) << ' '
        << num(py) << " M" << num(px) << ' ' << num(py - 8) << " L" << num(px) << ' '
        << num(py + 8) << "\" stroke=\"" << cluster_color(j)
        << "\" stroke-width=\"3\"><title>centroid C" << j + 1 << "</title></path>\n";
  }
  out << "</g>\n";
}

void bars_panel(std::ostringstream& out, const PlotData& data, double x0) {
  const std::size_t n = data.points.size();
  const double slot = kPanel / static_cast<double>(n);
  const double bar = std::max(slot * 0.8, 0.5);
  out << "<g id=\"memberships\">\n";
  out << "<rect x=\"" << num(x0) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(kPanel)
      << "\" height=\"" << num(kPanel) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = data.points[i];
    const double x = x0 + slot * static_cast<double>(i) + (slot - bar) / 2;
    double top = kMargin + kPanel;
    auto segment = [&](double value, const char* color) {
      const double h = value * kPanel;
      top -= h;
      out << "<rect x=\"" << num(x) << "\" y=\"" << num(top) << "\" width=\"" << num(bar)
          << "\" height=\"" << num(h) << "\" fill=\"" << color << "\"/>\n";
    };
    for (std::size_t j = 0; j < p.t.size(); ++j) segment(p.t[j], cluster_color(j));
    segment(p.f, kNoiseColor);
  }
  out << "</g>\n";
}

}  // namespace

std::string render_svg(const PlotData& data, bool scatter) {
  if (data.points.empty()) throw InvalidSpec("nothing to plot");
  if (scatter) {
    for (const auto& p : data.points) {
      if (p.coords.size() != 2) {
        throw ShapeMismatch("scatter plot needs 2-dimensional data, got " +
                            std::to_string(p.coords.size()) + " dimensions");
      }
    }
  }
  const int panels = scatter ? 2 : 1;
  const double width = panels * (kPanel + kMargin) + kMargin;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width)
      << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(width) << ' '
      << num(kHeight) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  out << "<text x=\"" << num(kMargin) << "\" y=\"24\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(data.title) << "</text>\n";
  double x0 = kMargin;
  if (scatter) {
    scatter_panel(out, data, x0);
    x0 += kPanel + kMargin;
  }
  bars_panel(out, data, x0);
  // Legend under the panels.
  double lx = kMargin;
  const double ly = kMargin + kPanel + 16.0;
  const std::size_t k = data.points.front().t.size();
  for (std::size_t j = 0; j < k; ++j) {
    out << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 9) << "\" width=\"10\" height=\"10\" "
        << "fill=\"" << cluster_color(j) << "\"/><text x=\"" << num(lx + 14) << "\" y=\""
        << num(ly) << "\" font-family=\"sans-serif\" font-size=\"11\">C" << j + 1 << "</text>\n";
    lx += 44;
  }
  out << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 9) << "\" width=\"10\" height=\"10\" "
      << "fill=\"" << kNoiseColor << "\"/><text x=\"" << num(lx + 14) << "\" y=\"" << num(ly)
      << "\" font-family=\"sans-serif\" font-size=\"11\">noise (F)</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace nsclust
