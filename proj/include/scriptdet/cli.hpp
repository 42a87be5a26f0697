#pragma once

#include "scriptdet/annotation_io.hpp"
#include "scriptdet/crossscript.hpp"
#include "scriptdet/metrics.hpp"
#include "scriptdet/zeroshot.hpp"

#include <filesystem>
#include <string>

#include <json.hpp>

namespace scriptdet::cli {

enum class DetectionLayout { PerImage, Combined };

/// Everything a subcommand needs. Loaded from a JSON config file, then
/// overridden by command-line flags.
struct RunConfig {
  std::filesystem::path gt_dir;
  std::filesystem::path detections;  // directory (per-image) or file (combined)
  DetectionLayout detection_layout = DetectionLayout::PerImage;
  std::filesystem::path embeddings;
  std::filesystem::path class_embeddings;
  std::filesystem::path assignments;  // optional: precomputed classify output
  std::filesystem::path image_meta;
  std::filesystem::path matrix;
  std::filesystem::path out_dir = "out";

  ClassSplit split = ClassSplit::mlt2019();
  ScriptSet ignore = ParseOptions{}.ignore;

  double iou_thresh = kDefaultIouThresh;
  double nms_iou = 0.3;
  double nms_score = 0.5;
  double threshold_close = kCloseThreshold;
  double threshold_loose = kLooseThreshold;
  double zero_gt_ap = 1.0;
  double crop_padding = 0.0;
  ScoreMode score_mode = ScoreMode::Detector;
  ParseMode parse_mode = ParseMode::Strict;
  ImageFilter image_filter = ImageFilter::Unseen;
  bool class_aware = true;
  unsigned jobs = 0;  // 0: one worker per available core

  [[nodiscard]] unsigned workers() const;

  /// Throws InvalidThreshold / InvalidConfig.
  void validate() const;
  [[nodiscard]] ParseOptions parse_options() const;
  [[nodiscard]] EvalConfig eval_config() const;
};

/// Reads the JSON config schema documented in the README. Relative paths are
/// resolved against the config file's directory. Throws InvalidConfig, Io.
RunConfig load_run_config(const std::filesystem::path& file);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Each command writes only inside config.out_dir and returns what it wrote
/// as data. Failures surface as scriptdet::Error.
nlohmann::json cmd_validate(const RunConfig& config);
nlohmann::json cmd_nms(const RunConfig& config);
nlohmann::json cmd_crop_specs(const RunConfig& config);
nlohmann::json cmd_classify(const RunConfig& config);
EvalReport cmd_evaluate(const RunConfig& config);
nlohmann::json cmd_analyze(const RunConfig& config);

}  // namespace scriptdet::cli
