#include "scriptdet/nms.hpp"

#include "scriptdet/error.hpp"

#include <algorithm>
#include <numeric>

namespace scriptdet {

std::vector<DetectionRecord> nms(std::span<const DetectionRecord> dets, double iou_thresh, double score_thresh,
                                 GeometryDiagnostics* diag) {
  if (!(iou_thresh >= 0.0 && iou_thresh <= 1.0) || !(score_thresh >= 0.0 && score_thresh <= 1.0)) {
    throw Error(ErrorCode::InvalidThreshold, "NMS thresholds must lie in [0,1]");
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].confidence >= score_thresh) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });

  std::vector<DetectionRecord> kept;
  for (const std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const DetectionRecord& k) {
      return quad_iou(k.quad, dets[i].quad, diag) > iou_thresh;
    });
    if (!suppressed) kept.push_back(dets[i]);
  }
  return kept;
}

}  // namespace scriptdet
