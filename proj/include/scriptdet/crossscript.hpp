#pragma once

#include "scriptdet/script_class.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace scriptdet {

inline constexpr double kCloseThreshold = 0.6;
inline constexpr double kLooseThreshold = 0.3;

/// values[i][j]: f-measure of a detector trained on scripts[i] and tested on
/// scripts[j]. Only diagonal entries may be missing.
struct FMeasureMatrix {
  std::vector<ScriptClass> scripts;
  std::vector<std::vector<std::optional<double>>> values;

  [[nodiscard]] std::size_t size() const noexcept { return scripts.size(); }
  [[nodiscard]] double at(std::size_t train, std::size_t test) const;
  [[nodiscard]] FMeasureMatrix transposed() const;

  /// Throws MalformedMatrix.
  void validate() const;
};

/// Header row and first column carry script names in the same order; the
/// top-left cell is free text. Empty diagonal cells mean "not measured".
/// Throws MalformedMatrix.
FMeasureMatrix parse_matrix_csv(std::istream& in);
void write_matrix_csv(std::ostream& out, const FMeasureMatrix& m);

struct LabeledValue {
  ScriptClass label;
  double value = 0.0;
};

struct ProximityList {
  ScriptClass script;
  std::vector<LabeledValue> close;  // descending f-measure, then name
};

/// For each script s: the other scripts t with m[s][t] >= threshold.
/// Throws InvalidThreshold outside [0, 1].
std::vector<ProximityList> proximity_edges(const FMeasureMatrix& m, double threshold);

struct LabeledSeries {
  ScriptClass script;
  std::vector<LabeledValue> values;
};

/// Row i without its diagonal entry, labelled by test script.
std::vector<LabeledSeries> one_train_test_rest(const FMeasureMatrix& m);
/// Column j without its diagonal entry, labelled by training script.
std::vector<LabeledSeries> one_test_train_rest(const FMeasureMatrix& m);

struct BoxStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<LabeledValue> outliers;  // ascending value, then label
};

/// Quartiles interpolate linearly between closest ranks; whiskers reach the
/// furthest points within 1.5 IQR of the box; anything beyond is an outlier.
/// Throws EmptyInput.
BoxStats box_stats(std::span<const LabeledValue> values);
BoxStats box_stats(std::span<const double> values);

nlohmann::json to_json(const std::vector<ProximityList>& edges);
nlohmann::json to_json(const BoxStats& stats);

/// One panel per script, one axis per other script. Marker distance from the
/// centre shrinks as the f-measure grows; red at >= close, green at >= loose.
std::string render_proximity_svg(const FMeasureMatrix& m, double close, double loose);

/// Horizontal box plots, one row per series, with the mean drawn in red.
std::string render_boxplot_svg(std::span<const LabeledSeries> series, const std::string& title);

}  // namespace scriptdet
