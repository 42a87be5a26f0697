#pragma once

#include "scriptdet/annotation_io.hpp"
#include "scriptdet/geometry.hpp"
#include "scriptdet/zeroshot.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace scriptdet {

inline constexpr double kDefaultIouThresh = 0.5;

struct RankedDetection {
  Quad quad;
  double score = 0.0;
};

struct GtRegion {
  Quad quad;
  bool dont_care = false;
};

enum class Outcome { TruePositive, FalsePositive, DontCare };

struct DetectionOutcome {
  Outcome outcome = Outcome::FalsePositive;
  std::optional<std::size_t> gt_index;  // matched (TP) or absorbing (DontCare) region
  double iou = 0.0;                     // IoU with that region, else best IoU seen
};

/// One-to-one matching for a single image. Outcomes are indexed like the
/// input detections.
struct MatchResult {
  std::vector<DetectionOutcome> detections;
  std::vector<bool> gt_matched;  // parallel to the ground truth; don't-care stays false
  std::size_t n_gt = 0;          // cared-for ground truth
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t dont_care_absorbed = 0;
};

/// Greedy matching in descending score (stable on ties). Each detection takes
/// the unmatched cared-for region with the highest IoU if that IoU reaches
/// `iou_thresh` (TP). Otherwise it is absorbed when some don't-care region
/// reaches the threshold, and is a FP if not.
/// Throws InvalidThreshold.
MatchResult match_detections(std::span<const RankedDetection> dets, std::span<const GtRegion> gts,
                             double iou_thresh = kDefaultIouThresh, GeometryDiagnostics* diag = nullptr);
MatchResult match_detections(std::span<const RankedDetection> dets, std::span<const GroundTruthRecord> gts,
                             double iou_thresh = kDefaultIouThresh, GeometryDiagnostics* diag = nullptr);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

PrecisionRecall precision_recall_f(std::size_t tp, std::size_t fp, std::size_t n_gt);

/// 11-point interpolated AP over a ranked TP/FP list: the mean, over recall
/// levels 0, 0.1, ..., 1, of the best precision reached at recall >= level.
/// With no ground truth the result is 0 if anything was detected and
/// `zero_gt_ap` otherwise.
double ap_11point(std::span<const bool> ranked_is_tp, std::size_t n_gt, double zero_gt_ap = 1.0);

/// Arithmetic mean of `per_class` over `classes`.
/// Throws EmptyClassSet, MissingClass.
double mean_ap(const std::map<ScriptClass, double>& per_class, const ScriptSet& classes);

struct EvalConfig {
  double iou_thresh = kDefaultIouThresh;
  ScoreMode score_mode = ScoreMode::Detector;
  double zero_gt_ap = 1.0;
  ImageFilter image_filter = ImageFilter::Unseen;
  bool class_aware = true;
  unsigned jobs = 1;
};

struct ClassReport {
  double ap = 0.0;
  std::size_t n_gt = 0;
  std::size_t n_det = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
};

struct DetectionReport {
  PrecisionRecall prf;
  std::size_t images = 0;
  std::size_t n_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t dont_care_absorbed = 0;
};

struct EvalReport {
  EvalConfig config;
  ClassSplit split;
  std::size_t images = 0;
  // Class-aware: detections ranked per assigned class, AP per unseen class.
  std::map<ScriptClass, ClassReport> per_class;
  std::optional<double> map;
  // Class-agnostic box quality on the evaluated images and per-script subsets.
  DetectionReport combined;
  std::map<ScriptClass, DetectionReport> per_script;
  std::size_t hull_fallbacks = 0;
  std::size_t detections_ignored = 0;  // on images outside the evaluated set
};

/// Evaluates detections (with their script assignments, keyed by region_key())
/// against ground truth on the images selected by `config.image_filter`.
/// Throws MissingEmbedding in class-aware mode when a detection has no
/// assignment, InvalidThreshold, and whatever matching throws.
EvalReport evaluate(const GroundTruthSet& gt, const DetectionSet& dets,
                    const std::map<std::string, ScriptAssignment>& assignments, const ClassSplit& split,
                    const EvalConfig& config);

nlohmann::json to_json(const EvalReport& report);
/// Pretty-printed JSON with a trailing newline; byte-stable for equal reports.
std::string report_to_string(const EvalReport& report);
/// CSV: class,ap,n_gt,n_det,tp,fp
std::string per_class_csv(const EvalReport& report);

}  // namespace scriptdet
