#pragma once

#include "scriptdet/annotation_io.hpp"

#include <span>
#include <vector>

namespace scriptdet {

inline constexpr double kDefaultNmsIou = 0.3;
inline constexpr double kDefaultNmsScore = 0.5;

/// Greedy non-maximum suppression over the detections of one image.
///
/// Detections with confidence below `score_thresh` are dropped. The rest are
/// visited in descending confidence (stable: equal confidences keep input
/// order) and kept unless their IoU with an already kept detection is
/// strictly greater than `iou_thresh`.
///
/// Throws InvalidThreshold unless both thresholds are in [0, 1].
std::vector<DetectionRecord> nms(std::span<const DetectionRecord> dets, double iou_thresh = kDefaultNmsIou,
                                 double score_thresh = kDefaultNmsScore, GeometryDiagnostics* diag = nullptr);

}  // namespace scriptdet
