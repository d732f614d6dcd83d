#pragma once

#include <string>
#include <vector>

namespace nsclust {

struct PlotPoint {
  std::vector<double> coords;
  std::vector<double> t;  // main memberships
  double f = 0.0;
  std::string verdict;    // "C<j>", "boundary(j,k)" or "outlier"
};

struct PlotData {
  std::string title;
  std::vector<PlotPoint> points;
  std::vector<std::vector<double>> centroids;
};

/// Self-contained SVG 1.1 document. With `scatter` the left panel shows the
/// points (2-D only) coloured by verdict with centroids marked; the other
/// panel always shows one stacked membership bar per point. Output depends
/// only on the input.
std::string render_svg(const PlotData& data, bool scatter);

}  // namespace nsclust
