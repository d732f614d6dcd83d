#include "nsclust/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "nsclust/errors.hpp"
#include "nsclust/random.hpp"

namespace nsclust {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw ShapeMismatch("ragged rows in Matrix::from_rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

DataSet::DataSet(Matrix points, std::optional<std::vector<int>> labels,
                 std::vector<std::string> feature_names, std::string name,
                 std::vector<std::string> label_names)
    : points_(std::move(points)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)),
      name_(std::move(name)),
      label_names_(std::move(label_names)) {
  if (points_.rows() == 0) throw EmptyDataset("dataset has no points");
  if (points_.cols() == 0) throw EmptyDataset("dataset has no features");
  for (double v : points_.data()) {
    if (!std::isfinite(v)) throw InvalidSpec("dataset contains a non-finite value");
  }
  if (labels_ && labels_->size() != points_.rows()) {
    throw ShapeMismatch("label count " + std::to_string(labels_->size()) +
                        " does not match point count " + std::to_string(points_.rows()));
  }
  if (!feature_names_.empty() && feature_names_.size() != points_.cols()) {
    throw ShapeMismatch("feature name count does not match dimension");
  }
  if (feature_names_.empty()) {
    for (std::size_t j = 0; j < points_.cols(); ++j) {
      feature_names_.push_back("x" + std::to_string(j + 1));
    }
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Splits one line on commas. Double-quoted fields may contain commas and
// doubled quotes.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"' && trim(cur).empty()) {
      quoted = true;
      was_quoted = true;
      cur.clear();
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else if (!was_quoted) {
      cur += c;
    }
  }
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

std::optional<double> parse_number(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string format_double(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

DataSet load_csv(const std::string& path, const std::optional<ColumnRef>& label_column,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path);

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (header_pending) {
      header = std::move(fields);
      header_pending = false;
      continue;
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw EmptyDataset("no data rows in " + path);

  const std::size_t width = has_header ? header.size() : rows.front().size();

  std::optional<std::size_t> label_index;
  if (label_column) {
    if (const auto* name = std::get_if<std::string>(&*label_column)) {
      const auto it = std::find(header.begin(), header.end(), *name);
      if (it == header.end()) {
        // Allow a bare integer given as text, e.g. from the command line.
        if (const auto idx = parse_number(*name); idx && *idx >= 0 && *idx == std::floor(*idx)) {
          label_index = static_cast<std::size_t>(*idx);
        } else {
          throw InvalidSpec("label column '" + *name + "' not found in " + path);
        }
      } else {
        label_index = static_cast<std::size_t>(it - header.begin());
      }
    } else {
      label_index = std::get<std::size_t>(*label_column);
    }
    if (*label_index >= width) {
      throw IndexOutOfRange("label column index " + std::to_string(*label_index) +
                            " outside " + std::to_string(width) + " columns");
    }
  }

  const std::size_t d = width - (label_index ? 1 : 0);
  if (d == 0) throw EmptyDataset("no feature columns in " + path);

  Matrix points(rows.size(), d);
  std::vector<std::string> raw_labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& fields = rows[r];
    if (fields.size() != width) {
      throw ParseError(r, std::min(fields.size(), width),
                       "expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()));
    }
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_index && c == *label_index) {
        raw_labels.push_back(fields[c]);
        continue;
      }
      const auto value = parse_number(fields[c]);
      if (!value) throw ParseError(r, c, "'" + fields[c] + "' is not a number");
      points(r, out_col++) = *value;
    }
  }

  std::vector<std::string> names;
  if (has_header) {
    for (std::size_t c = 0; c < width; ++c) {
      if (!label_index || c != *label_index) names.push_back(header[c]);
    }
  }

  std::optional<std::vector<int>> labels;
  std::vector<std::string> label_names;
  if (label_index) {
    std::vector<int> ids;
    ids.reserve(raw_labels.size());
    bool integral = true;
    for (const auto& text : raw_labels) {
      const auto v = parse_number(text);
      if (!v || *v != std::floor(*v) || std::abs(*v) > 1e9) {
        integral = false;
        break;
      }
      ids.push_back(static_cast<int>(*v));
    }
    if (!integral) {
      const std::set<std::string> categories(raw_labels.begin(), raw_labels.end());
      label_names.assign(categories.begin(), categories.end());
      ids.clear();
      for (const auto& text : raw_labels) {
        ids.push_back(static_cast<int>(
            std::lower_bound(label_names.begin(), label_names.end(), text) -
            label_names.begin()));
      }
    }
    labels = std::move(ids);
  }

  std::string stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) {
    stem = stem.substr(slash + 1);
  }
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) {
    stem = stem.substr(0, dot);
  }
  return DataSet(std::move(points), std::move(labels), std::move(names), stem,
                 std::move(label_names));
}

void write_csv(const DataSet& ds, const std::string& path, const std::string& label_header) {
  std::ofstream out(path);
  if (!out) throw MissingFile(path);
  for (std::size_t j = 0; j < ds.d(); ++j) {
    if (j) out << ',';
    out << ds.feature_names()[j];
  }
  if (ds.has_labels()) out << ',' << label_header;
  out << '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < ds.d(); ++j) {
      if (j) out << ',';
      out << format_double(ds.points()(i, j), 17);
    }
    if (ds.has_labels()) {
      const int label = (*ds.labels())[i];
      out << ',';
      if (!ds.label_names().empty()) {
        out << quote_if_needed(ds.label_names()[static_cast<std::size_t>(label)]);
      } else {
        out << label;
      }
    }
    out << '\n';
  }
  if (!out) throw MissingFile(path);
}

DataSet normalize(const DataSet& ds, NormalizationMode mode) {
  if (mode == NormalizationMode::None) return ds;
  Matrix out = ds.points();
  const std::size_t n = ds.n();
  for (std::size_t j = 0; j < ds.d(); ++j) {
    if (mode == NormalizationMode::MinMaxUnit) {
      double lo = out(0, j);
      double hi = out(0, j);
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, out(i, j));
        hi = std::max(hi, out(i, j));
      }
      const double range = hi - lo;
      for (std::size_t i = 0; i < n; ++i) {
        out(i, j) = range > 0.0 ? (out(i, j) - lo) / range : 0.0;
      }
    } else {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += out(i, j);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = out(i, j) - mean;
        var += diff * diff;
      }
      const double sd = std::sqrt(var / static_cast<double>(n));
      // Relative test so that rounding noise in a constant column is not
      // blown up to unit variance.
      const bool constant = sd <= 1e-12 * std::max(1.0, std::abs(mean));
      for (std::size_t i = 0; i < n; ++i) {
        out(i, j) = constant ? 0.0 : (out(i, j) - mean) / sd;
      }
    }
  }
  return DataSet(std::move(out), ds.labels(), ds.feature_names(), ds.name(), ds.label_names());
}

DataSet drop_constant_columns(const DataSet& ds) {
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < ds.d(); ++j) {
    for (std::size_t i = 1; i < ds.n(); ++i) {
      if (ds.points()(i, j) != ds.points()(0, j)) {
        keep.push_back(j);
        break;
      }
    }
  }
  if (keep.empty()) throw EmptyDataset("every feature column is constant");
  Matrix out(ds.n(), keep.size());
  std::vector<std::string> names;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    names.push_back(ds.feature_names()[keep[k]]);
    for (std::size_t i = 0; i < ds.n(); ++i) out(i, k) = ds.points()(i, keep[k]);
  }
  return DataSet(std::move(out), ds.labels(), std::move(names), ds.name(), ds.label_names());
}

DataSet binarize_labels(const DataSet& ds) {
  if (!ds.has_labels()) throw MissingLabels("binarize_labels needs labels");
  const auto& labels = *ds.labels();
  const int smallest = *std::min_element(labels.begin(), labels.end());
  std::vector<int> binary;
  binary.reserve(labels.size());
  for (int v : labels) binary.push_back(v == smallest ? 0 : 1);
  return DataSet(ds.points(), std::move(binary), ds.feature_names(), ds.name());
}

NormalizationMode parse_normalization(const std::string& text) {
  if (text == "none") return NormalizationMode::None;
  if (text == "minmax") return NormalizationMode::MinMaxUnit;
  if (text == "zscore") return NormalizationMode::ZScore;
  throw InvalidConfig("unknown normalization '" + text + "' (expected none, minmax, zscore)");
}

std::string to_string(NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::None:
      return "none";
    case NormalizationMode::MinMaxUnit:
      return "minmax";
    case NormalizationMode::ZScore:
      return "zscore";
  }
  return "none";
}

std::vector<int> lattice_offset(std::size_t index, std::size_t dims) {
  std::vector<int> offset(dims, 0);
  if (index == 0 || dims == 0) return offset;
  if (dims == 1) {
    // 0, 1, -1, 2, -2, ...
    const int magnitude = static_cast<int>((index + 1) / 2);
    offset[0] = index % 2 == 1 ? magnitude : -magnitude;
    return offset;
  }
  struct Site {
    int x, y, norm2;
    double angle;
  };
  int radius = 1;
  while (static_cast<std::size_t>((2 * radius - 1) * (2 * radius - 1)) <= index) ++radius;
  std::vector<Site> sites;
  for (int x = -radius; x <= radius; ++x) {
    for (int y = -radius; y <= radius; ++y) {
      double angle = std::atan2(static_cast<double>(y), static_cast<double>(x));
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      sites.push_back({x, y, x * x + y * y, angle});
    }
  }
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    if (a.norm2 != b.norm2) return a.norm2 < b.norm2;
    return a.angle < b.angle;
  });
  offset[0] = sites[index].x;
  offset[1] = sites[index].y;
  return offset;
}

DataSet gen_scatter(const ScatterSpec& spec, const std::string& name) {
  if (spec.cluster_centers.size() != spec.points_per_cluster.size()) {
    throw InvalidSpec("points_per_cluster has " + std::to_string(spec.points_per_cluster.size()) +
                      " entries for " + std::to_string(spec.cluster_centers.size()) +
                      " cluster centers");
  }
  if (!(spec.jitter >= 0.0)) throw InvalidSpec("jitter must be non-negative");
  if (!(spec.spread >= 0.0)) throw InvalidSpec("spread must be non-negative");

  std::optional<std::size_t> dims;
  auto check_dim = [&](const std::vector<double>& p) {
    if (!dims) dims = p.size();
    if (p.size() != *dims || p.empty()) throw InvalidSpec("inconsistent point dimensions");
  };
  for (const auto& c : spec.cluster_centers) check_dim(c);
  for (const auto& p : spec.boundary_points) check_dim(p);
  for (const auto& p : spec.outlier_points) check_dim(p);
  if (!dims) throw InvalidSpec("scatter spec contains no points");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  Rng rng(spec.seed);
  for (std::size_t c = 0; c < spec.cluster_centers.size(); ++c) {
    for (std::size_t k = 0; k < spec.points_per_cluster[c]; ++k) {
      const auto offset = lattice_offset(k, *dims);
      std::vector<double> p = spec.cluster_centers[c];
      for (std::size_t j = 0; j < *dims; ++j) {
        p[j] += spec.spread * offset[j];
        if (spec.jitter > 0.0) p[j] += spec.jitter * rng.normal();
      }
      rows.push_back(std::move(p));
      labels.push_back(static_cast<int>(c));
    }
  }
  for (const auto& p : spec.boundary_points) {
    rows.push_back(p);
    labels.push_back(kBoundaryGroup);
  }
  for (const auto& p : spec.outlier_points) {
    rows.push_back(p);
    labels.push_back(kOutlierGroup);
  }
  if (rows.empty()) throw InvalidSpec("scatter spec generates no points");
  return DataSet(Matrix::from_rows(rows), std::move(labels), {}, name);
}

namespace {

constexpr double kLattice = 1.0 / 32.0;

std::vector<std::vector<double>> corner_outliers() {
  return {{-0.75, 0.75}, {0.75, 0.75}, {-0.75, -0.75}, {0.75, -0.75}};
}

}  // namespace

ScatterPreset preset_x13() {
  ScatterPreset p;
  p.name = "x13";
  p.k = 2;
  p.spec.cluster_centers = {{-0.125, 0.0}, {0.125, 0.0}};
  p.spec.points_per_cluster = {4, 4};
  p.spec.boundary_points = {{0.0, 0.0}};
  p.spec.outlier_points = corner_outliers();
  p.spec.spread = kLattice;
  return p;
}

ScatterPreset preset_x37() {
  // Boundary points sit within the density radius of both neighbouring
  // clusters, so they carry full certainty and do not drag the centroids.
  constexpr double c = 5 * kLattice;
  constexpr double h = c / 2;
  ScatterPreset p;
  p.name = "x37";
  p.k = 3;
  p.spec.cluster_centers = {{-c, 0.0}, {0.0, 0.0}, {c, 0.0}};
  p.spec.points_per_cluster = {9, 9, 9};
  p.spec.boundary_points = {{-h, -kLattice}, {-h, 0.0}, {-h, kLattice},
                            {h, -kLattice},  {h, 0.0},  {h, kLattice}};
  p.spec.outlier_points = corner_outliers();
  p.spec.spread = kLattice;
  return p;
}

ScatterPreset preset_x43() {
  // Near-equilateral triangle with circumradius 2.5 lattice steps; the
  // x offset is sqrt(3)/2 * r rounded to a multiple of 1/512.
  constexpr double r = 2.5 * kLattice;
  constexpr double cx = 35.0 / 512.0;
  ScatterPreset p;
  p.name = "x43";
  p.k = 3;
  p.spec.cluster_centers = {{0.0, r}, {-cx, -r / 2}, {cx, -r / 2}};
  p.spec.points_per_cluster = {12, 12, 12};
  p.spec.boundary_points = {{-cx / 2, r / 4}, {0.0, 0.0}, {cx / 2, r / 4}};
  p.spec.outlier_points = corner_outliers();
  p.spec.spread = kLattice;
  return p;
}

ScatterPreset preset_by_name(const std::string& name) {
  if (name == "x13") return preset_x13();
  if (name == "x37") return preset_x37();
  if (name == "x43") return preset_x43();
  throw InvalidSpec("unknown preset '" + name + "' (expected x13, x37, x43)");
}

std::vector<std::string> preset_names() { return {"x13", "x37", "x43"}; }

}  // namespace nsclust
