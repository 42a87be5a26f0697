#include "scriptdet/geometry.hpp"

#include "scriptdet/detail/strings.hpp"
#include "scriptdet/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace scriptdet {

namespace {

constexpr double kPi = std::numbers::pi;

// Sign of the turn a->b->c: >0 left (in math axes), <0 right, 0 collinear.
double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

bool on_segment(Point2 p, Point2 a, Point2 b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return (d1 == 0 && on_segment(p1, q1, q2)) || (d2 == 0 && on_segment(p2, q1, q2)) ||
         (d3 == 0 && on_segment(q1, p1, p2)) || (d4 == 0 && on_segment(q2, p1, p2));
}

bool self_intersecting(const std::array<Point2, 4>& v) {
  return segments_intersect(v[0], v[1], v[2], v[3]) || segments_intersect(v[1], v[2], v[3], v[0]);
}

double normalize_angle(double a) {
  a = std::fmod(a, kPi);
  if (a < 0) a += kPi;
  if (a >= kPi || kPi - a < 1e-12) a = 0.0;
  return a;
}

// Builds a CropSpec with width >= height from a rectangle whose `w` side runs
// along the unit vector `dir`.
CropSpec canonical_spec(Point2 center, Point2 dir, double w, double h) {
  if (h > w) {
    std::swap(w, h);
    dir = {-dir.y, dir.x};
  }
  double angle = normalize_angle(std::atan2(dir.y, dir.x));
  if (w - h <= 1e-9 * w) {
    // Square: both sides qualify as the width edge; take the smaller angle.
    angle = std::min(angle, normalize_angle(angle + kPi / 2));
  }
  return CropSpec{center, w, h, angle};
}

std::vector<Point2> as_convex_polygon(const Quad& q, GeometryDiagnostics* diag) {
  const auto& v = q.vertices();
  if (q.is_convex()) return {v.begin(), v.end()};
  if (diag != nullptr) ++diag->hull_fallbacks;
  return convex_hull(v);
}

bool lexicographically_less(const Quad& a, const Quad& b) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (a[i].x != b[i].x) return a[i].x < b[i].x;
    if (a[i].y != b[i].y) return a[i].y < b[i].y;
  }
  return false;
}

}  // namespace

double Quad::area() const { return polygon_area(v_); }

bool Quad::is_convex() const {
  for (std::size_t i = 0; i < 4; ++i) {
    if (orient(v_[i], v_[(i + 1) % 4], v_[(i + 2) % 4]) < 0) return false;
  }
  return true;
}

std::array<Point2, 4> CropSpec::corners() const {
  const Point2 d{std::cos(angle), std::sin(angle)};
  const Point2 n{-d.y, d.x};
  const Point2 hw = d * (width / 2);
  const Point2 hh = n * (height / 2);
  return {center - hw - hh, center + hw - hh, center + hw + hh, center - hw + hh};
}

double signed_area(std::span<const Point2> poly) {
  if (poly.size() < 3) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    sum += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return sum / 2;
}

double polygon_area(std::span<const Point2> poly) { return std::abs(signed_area(poly)); }

std::vector<Point2> convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Point2> clip_convex(std::span<const Point2> subject, std::span<const Point2> clip) {
  std::vector<Point2> output(subject.begin(), subject.end());
  for (std::size_t i = 0; i < clip.size() && !output.empty(); ++i) {
    const Point2 c0 = clip[i];
    const Point2 c1 = clip[(i + 1) % clip.size()];
    const Point2 edge = c1 - c0;
    const std::vector<Point2> input = std::move(output);
    output.clear();
    for (std::size_t j = 0; j < input.size(); ++j) {
      const Point2 cur = input[j];
      const Point2 prev = input[(j + input.size() - 1) % input.size()];
      const double s_cur = cross(edge, cur - c0);
      const double s_prev = cross(edge, prev - c0);
      if (s_cur >= 0) {
        if (s_prev < 0) output.push_back(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
        output.push_back(cur);
      } else if (s_prev >= 0) {
        output.push_back(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
      }
    }
  }
  return output;
}

Quad normalize_quad(const std::array<Point2, 4>& raw, ParseMode mode) {
  for (const auto& p : raw) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::NonFiniteValue, "quad vertex is not finite");
    }
  }
  auto v = raw;
  if (self_intersecting(v)) {
    if (mode == ParseMode::Strict) throw Error(ErrorCode::DegenerateQuad, "quad is self-intersecting");
    Point2 c{};
    for (const auto& p : v) c = c + p * 0.25;
    std::sort(v.begin(), v.end(), [c](Point2 a, Point2 b) {
      return std::atan2(a.y - c.y, a.x - c.x) < std::atan2(b.y - c.y, b.x - c.x);
    });
  }
  const double area = signed_area(v);
  if (std::abs(area) < kDegenerateArea) throw Error(ErrorCode::DegenerateQuad, "quad has zero area");
  if (area < 0) std::reverse(v.begin(), v.end());

  const auto start = std::min_element(v.begin(), v.end(), [](Point2 a, Point2 b) {
    const double sa = a.x + a.y;
    const double sb = b.x + b.y;
    return sa < sb || (sa == sb && a.y < b.y);
  });
  std::rotate(v.begin(), start, v.end());
  return Quad(v);
}

double quad_iou(const Quad& a, const Quad& b, GeometryDiagnostics* diag) {
  const Quad* first = &a;
  const Quad* second = &b;
  if (lexicographically_less(b, a)) std::swap(first, second);
  const auto pa = as_convex_polygon(*first, diag);
  const auto pb = as_convex_polygon(*second, diag);
  const double inter = polygon_area(clip_convex(pa, pb));
  const double uni = polygon_area(pa) + polygon_area(pb) - inter;
  if (uni <= 0) throw Error(ErrorCode::DegenerateQuad, "union of quads has zero area");
  return std::clamp(inter / uni, 0.0, 1.0);
}

CropSpec min_area_rect(std::span<const Point2> points) {
  const auto hull = convex_hull(points);
  if (hull.size() < 3 || polygon_area(hull) < kDegenerateArea) {
    throw Error(ErrorCode::DegenerateQuad, "point set has no area");
  }
  const std::size_t n = hull.size();
  const auto proj = [&](std::size_t k, Point2 d) { return dot(hull[k % n], d); };

  // Advances a caliper while the next hull vertex projects further along d.
  const auto advance = [&](std::size_t& idx, Point2 d, double sign) {
    for (std::size_t step = 0; step < n && sign * proj(idx + 1, d) >= sign * proj(idx, d); ++step) {
      idx = (idx + 1) % n;
    }
  };

  std::size_t right = 0;
  std::size_t top = 0;
  std::size_t left = 0;
  double best_area = std::numeric_limits<double>::infinity();
  CropSpec best{};
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e = hull[(i + 1) % n] - hull[i];
    const double len = std::hypot(e.x, e.y);
    const Point2 u = e * (1.0 / len);
    const Point2 nrm{-u.y, u.x};  // points into the hull
    if (i == 0) {
      for (std::size_t k = 1; k < n; ++k) {
        if (proj(k, u) > proj(right, u)) right = k;
        if (proj(k, nrm) > proj(top, nrm)) top = k;
        if (proj(k, u) < proj(left, u)) left = k;
      }
    } else {
      advance(right, u, 1.0);
      advance(top, nrm, 1.0);
      advance(left, u, -1.0);
    }
    const double min_u = proj(left, u);
    const double max_u = proj(right, u);
    const double min_n = proj(i, nrm);
    const double max_n = proj(top, nrm);
    const double w = max_u - min_u;
    const double h = max_n - min_n;
    if (w * h < best_area) {
      best_area = w * h;
      const Point2 center = u * ((min_u + max_u) / 2) + nrm * ((min_n + max_n) / 2);
      best = canonical_spec(center, u, w, h);
    }
  }
  return best;
}

CropSpec min_area_rect(const Quad& quad) { return min_area_rect(quad.vertices()); }

ClampedCrop crop_spec_for_quad(const Quad& quad, const ImageMeta& image, double padding) {
  if (image.width <= 0 || image.height <= 0) {
    throw Error(ErrorCode::InvalidConfig, "image '" + image.image_id + "' has non-positive size");
  }
  const auto w = static_cast<double>(image.width);
  const auto h = static_cast<double>(image.height);
  const std::array<Point2, 4> bounds{Point2{0, 0}, Point2{w, 0}, Point2{w, h}, Point2{0, h}};

  const auto hull = convex_hull(quad.vertices());
  if (polygon_area(clip_convex(hull, bounds)) < kDegenerateArea) {
    throw Error(ErrorCode::QuadOutsideImage, "quad does not overlap image '" + image.image_id + "'");
  }

  CropSpec spec = min_area_rect(quad);
  if (padding > 0) {
    spec.width += 2 * padding;
    spec.height += 2 * padding;
  }
  const auto corners = spec.corners();
  constexpr double tol = 1e-9;
  const bool inside = std::all_of(corners.begin(), corners.end(), [&](Point2 p) {
    return p.x >= -tol && p.x <= w + tol && p.y >= -tol && p.y <= h + tol;
  });
  if (inside) return {spec, false};

  // Shrink to the visible part, measured in the rectangle's own frame.
  const auto visible = clip_convex(corners, bounds);
  const Point2 d{std::cos(spec.angle), std::sin(spec.angle)};
  const Point2 n{-d.y, d.x};
  double min_d = std::numeric_limits<double>::infinity();
  double max_d = -min_d;
  double min_n = min_d;
  double max_n = -min_d;
  for (const auto& p : visible) {
    const Point2 r = p - spec.center;
    min_d = std::min(min_d, dot(r, d));
    max_d = std::max(max_d, dot(r, d));
    min_n = std::min(min_n, dot(r, n));
    max_n = std::max(max_n, dot(r, n));
  }
  const Point2 center = spec.center + d * ((min_d + max_d) / 2) + n * ((min_n + max_n) / 2);
  return {canonical_spec(center, d, max_d - min_d, max_n - min_n), true};
}

void write_crop_specs_csv(std::ostream& out, std::span<const CropSpecRow> rows) {
  using detail::format_number;
  out << "image_id,region_id,cx,cy,w,h,angle_rad,clamped\n";
  for (const auto& r : rows) {
    const auto& s = r.crop.spec;
    out << r.image_id << ',' << r.region_id << ',' << format_number(s.center.x) << ','
        << format_number(s.center.y) << ',' << format_number(s.width) << ',' << format_number(s.height)
        << ',' << format_number(s.angle) << ',' << (r.crop.clamped ? 1 : 0) << '\n';
  }
}

std::vector<CropSpecRow> read_crop_specs_csv(std::istream& in) {
  std::vector<CropSpecRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = detail::trim(line_no == 1 ? detail::strip_bom(line) : std::string_view(line));
    if (text.empty() || line_no == 1) continue;  // header
    const auto f = detail::split(text, ',');
    if (f.size() != 8) {
      throw Error(ErrorCode::MalformedLine, "crop spec line " + std::to_string(line_no) + ": expected 8 fields");
    }
    std::array<double, 5> v{};
    for (std::size_t i = 0; i < 5; ++i) {
      const auto parsed = detail::parse_double(f[i + 2]);
      if (!parsed) throw Error(ErrorCode::MalformedLine, "crop spec line " + std::to_string(line_no));
      v[i] = *parsed;
    }
    CropSpecRow row{std::string(f[0]), std::string(f[1]),
                    ClampedCrop{CropSpec{{v[0], v[1]}, v[2], v[3], v[4]}, detail::trim(f[7]) == "1"}};
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace scriptdet
