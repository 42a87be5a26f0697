#pragma once

// Independent reference computations used only by tests. None of these call
// into the code paths they check (no clipping, no calipers, no suffix maxima).

#include "scriptdet/annotation_io.hpp"
#include "scriptdet/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using scriptdet::Point2;

inline bool inside_convex(std::span<const Point2> poly, Point2 p) {
  // Works for either orientation: all edge turns share a sign.
  bool pos = false;
  bool neg = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[(i + 1) % poly.size()];
    const double c = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    pos = pos || c > 0;
    neg = neg || c < 0;
  }
  return !(pos && neg);
}

/// IoU of two convex quads by uniform sampling of their joint bounding box.
inline double monte_carlo_iou(const scriptdet::Quad& a, const scriptdet::Quad& b, std::size_t samples,
                              std::mt19937_64& rng) {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (const auto* q : {&a, &b}) {
    for (const auto& p : q->vertices()) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  std::uniform_real_distribution<double> ux(x0, x1);
  std::uniform_real_distribution<double> uy(y0, y1);
  std::size_t in_a = 0;
  std::size_t in_b = 0;
  std::size_t both = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Point2 p{ux(rng), uy(rng)};
    const bool ia = inside_convex(a.vertices(), p);
    const bool ib = inside_convex(b.vertices(), p);
    in_a += ia;
    in_b += ib;
    both += ia && ib;
  }
  const std::size_t uni = in_a + in_b - both;
  return uni == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(uni);
}

inline double aabb_area_at(std::span<const Point2> pts, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (const auto& p : pts) {
    const double rx = c * p.x + s * p.y;
    const double ry = -s * p.x + c * p.y;
    x0 = std::min(x0, rx);
    x1 = std::max(x1, rx);
    y0 = std::min(y0, ry);
    y1 = std::max(y1, ry);
  }
  return (x1 - x0) * (y1 - y0);
}

struct SweepResult {
  double area;
  double angle;
};

/// Minimum axis-aligned bounding area over `steps` rotations in [0, pi).
inline SweepResult sweep_min_area(std::span<const Point2> pts, int steps = 1800) {
  SweepResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (int k = 0; k < steps; ++k) {
    const double theta = std::numbers::pi * k / steps;
    const double a = aabb_area_at(pts, theta);
    if (a < best.area) best = {a, theta};
  }
  return best;
}

/// The sweep minimum refined by golden-section search inside the winning
/// bracket, which removes the sweep's ~1e-3 discretization error.
inline SweepResult refined_sweep_min_area(std::span<const Point2> pts, int steps = 1800) {
  const auto coarse = sweep_min_area(pts, steps);
  const double h = std::numbers::pi / steps;
  double lo = coarse.angle - h;
  double hi = coarse.angle + h;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - g * (hi - lo);
    const double m2 = lo + g * (hi - lo);
    if (aabb_area_at(pts, m1) < aabb_area_at(pts, m2)) hi = m2;
    else lo = m1;
  }
  const double theta = (lo + hi) / 2;
  const double refined = aabb_area_at(pts, theta);
  return refined < coarse.area ? SweepResult{refined, theta} : coarse;
}

/// 11-point AP straight from the definition: for every level, scan every
/// prefix of the ranked list.
inline double ap_by_prefix_enumeration(const std::vector<bool>& ranked, std::size_t n_gt) {
  double sum = 0.0;
  for (std::size_t level = 0; level <= 10; ++level) {
    double best = 0.0;
    for (std::size_t k = 1; k <= ranked.size(); ++k) {
      const auto tp = static_cast<std::size_t>(std::count(ranked.begin(), ranked.begin() + static_cast<long>(k), true));
      if (10 * tp >= level * n_gt) best = std::max(best, static_cast<double>(tp) / static_cast<double>(k));
    }
    sum += best;
  }
  return sum / 11;
}

/// Greedy NMS characterised without running it: the kept set K is the unique
/// subset of the score-passing detections such that no member is suppressed
/// by a higher-ranked member, and every non-member is. Enumerates all subsets.
inline std::optional<std::vector<std::size_t>> nms_by_keepset_enumeration(
    std::span<const scriptdet::DetectionRecord> dets, double iou_thresh, double score_thresh) {
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].confidence >= score_thresh) cand.push_back(i);
  }
  // rank: higher confidence first, then input order
  const auto outranks = [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence || (dets[a].confidence == dets[b].confidence && a < b);
  };
  std::optional<std::vector<std::size_t>> found;
  const std::size_t n = cand.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      bool suppressed = false;
      for (std::size_t j = 0; j < n; ++j) {
        if ((mask >> j & 1) && j != i && outranks(cand[j], cand[i]) &&
            scriptdet::quad_iou(dets[cand[j]].quad, dets[cand[i]].quad) > iou_thresh) {
          suppressed = true;
        }
      }
      const bool member = mask >> i & 1;
      ok = member != suppressed;
    }
    if (!ok) continue;
    if (found) return std::nullopt;  // not unique: the characterisation failed
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) keep.push_back(cand[i]);
    }
    std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) { return outranks(a, b); });
    found = keep;
  }
  return found;
}

/// Convex quad: four sorted angles on a random rotated ellipse.
inline std::array<Point2, 4> random_convex_quad(std::mt19937_64& rng, double spread = 20.0) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double cx = spread * u01(rng);
  const double cy = spread * u01(rng);
  const double ax = 2.0 + 10.0 * u01(rng);
  const double ay = 2.0 + 10.0 * u01(rng);
  const double rot = std::numbers::pi * u01(rng);
  std::array<double, 4> t{};
  while (true) {
    for (auto& v : t) v = 2 * std::numbers::pi * u01(rng);
    std::sort(t.begin(), t.end());
    bool spaced = true;
    for (std::size_t i = 0; i < 4; ++i) {
      const double gap = i + 1 < 4 ? t[i + 1] - t[i] : t[0] + 2 * std::numbers::pi - t[3];
      spaced = spaced && gap > 0.2;
    }
    if (spaced) break;
  }
  std::array<Point2, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double ex = ax * std::cos(t[i]);
    const double ey = ay * std::sin(t[i]);
    out[i] = {cx + ex * std::cos(rot) - ey * std::sin(rot), cy + ex * std::sin(rot) + ey * std::cos(rot)};
  }
  return out;
}

/// Star-shaped (hence simple) quad that may be non-convex.
inline std::array<Point2, 4> random_simple_quad(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::array<Point2, 4> out{};
  const double cx = 50 * u01(rng);
  const double cy = 50 * u01(rng);
  for (std::size_t i = 0; i < 4; ++i) {
    const double t = std::numbers::pi / 2 * (static_cast<double>(i) + 0.1 + 0.8 * u01(rng));
    const double r = 2 + 15 * u01(rng);
    out[i] = {cx + r * std::cos(t), cy + r * std::sin(t)};
  }
  return out;
}

}  // namespace oracle
