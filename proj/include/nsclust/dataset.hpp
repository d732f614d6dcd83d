#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nsclust/matrix.hpp"

namespace nsclust {

/// Group labels written by gen_scatter for points that are not drawn from a
/// cluster.
inline constexpr int kBoundaryGroup = -1;
inline constexpr int kOutlierGroup = -2;

/// n points in d dimensions with optional integer class labels.
///
/// The constructor enforces n >= 1, d >= 1, finite values and
/// |labels| == n. Instances are not modified after construction; every
/// transformation returns a new DataSet.
class DataSet {
 public:
  DataSet(Matrix points, std::optional<std::vector<int>> labels = std::nullopt,
          std::vector<std::string> feature_names = {}, std::string name = {},
          std::vector<std::string> label_names = {});

  std::size_t n() const noexcept { return points_.rows(); }
  std::size_t d() const noexcept { return points_.cols(); }

  const Matrix& points() const noexcept { return points_; }
  std::span<const double> point(std::size_t i) const { return points_.row(i); }

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::string& name() const noexcept { return name_; }

  /// Original spelling of each label id when the label column held text;
  /// empty when labels were numeric.
  const std::vector<std::string>& label_names() const noexcept { return label_names_; }

 private:
  Matrix points_;
  std::optional<std::vector<int>> labels_;
  std::vector<std::string> feature_names_;
  std::string name_;
  std::vector<std::string> label_names_;
};

enum class NormalizationMode { None, MinMaxUnit, ZScore };

/// Column reference: header name or 0-based field index.
using ColumnRef = std::variant<std::string, std::size_t>;

/// Reads comma-separated numeric data.
///
/// Blank lines are skipped and fields are trimmed. When `label_column` is set
/// that column becomes the label vector: integral values are used as-is,
/// anything else is treated as a category and mapped to ids in sorted order.
/// Every other cell must parse as a finite number.
DataSet load_csv(const std::string& path, const std::optional<ColumnRef>& label_column,
                 bool has_header = true);

/// Writes features (full round-trip precision) and, when present, labels in a
/// trailing column named `label_header`.
void write_csv(const DataSet& ds, const std::string& path,
               const std::string& label_header = "group");

DataSet normalize(const DataSet& ds, NormalizationMode mode);

/// Removes features whose values are all identical. Throws EmptyDataset if
/// nothing is left.
DataSet drop_constant_columns(const DataSet& ds);

/// Maps the smallest label to 0 and every other label to 1.
DataSet binarize_labels(const DataSet& ds);

NormalizationMode parse_normalization(const std::string& text);
std::string to_string(NormalizationMode mode);

struct ScatterSpec {
  std::vector<std::vector<double>> cluster_centers;
  std::vector<std::size_t> points_per_cluster;
  std::vector<std::vector<double>> boundary_points;
  std::vector<std::vector<double>> outlier_points;
  /// Standard deviation of the Gaussian noise added to cluster points.
  double jitter = 0.0;
  /// Lattice spacing of the deterministic cluster layout.
  double spread = 1.0 / 32.0;
  std::uint64_t seed = 0;
};

/// Integer lattice offset of the i-th point of a cluster: points are taken by
/// increasing distance from the origin and, at equal distance, by increasing
/// angle from the +x axis. The layout is mirror-symmetric about the y axis at
/// every count in {1, 4, 9, 12}.
std::vector<int> lattice_offset(std::size_t index, std::size_t dims);

/// Synthesizes a labeled scatter: cluster points (center + spread * lattice
/// offset + jitter noise) in cluster order, then boundary points, then
/// outliers. Labels are the cluster index, kBoundaryGroup or kOutlierGroup.
DataSet gen_scatter(const ScatterSpec& spec, const std::string& name = "scatter");

/// A generated scenario plus the settings it was designed for.
struct ScatterPreset {
  std::string name;
  ScatterSpec spec;
  int k = 2;
  /// Coordinates are generated in model units, so presets are not rescaled.
  NormalizationMode normalization = NormalizationMode::None;
  /// Preset costs are O(1e-3). Iterate until the cost stops moving in
  /// double precision so the result is a fixed point to ~1e-8.
  double stop_eps = 1e-18;
};

/// Two clusters of 4, one midpoint, four remote outliers (13 points).
ScatterPreset preset_x13();
/// Three clusters of 9 in a row, three boundary points between each
/// neighbouring pair, four outliers (37 points).
ScatterPreset preset_x37();
/// Three clusters of 12 on a triangle, points between C1-C2, C1-C2-C3 and
/// C1-C3, four outliers (43 points).
ScatterPreset preset_x43();

/// Looks up "x13", "x37" or "x43". Throws InvalidSpec for anything else.
ScatterPreset preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace nsclust
