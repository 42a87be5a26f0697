#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace scriptdet {

/// Strict parsing rejects anything questionable; lenient parsing repairs or
/// skips it and counts what happened.
enum class ParseMode { Strict, Lenient };

/// Image coordinates: x to the right, y downward, in pixels.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

/// Polygons with area below this many square pixels are degenerate.
inline constexpr double kDegenerateArea = 1e-9;

struct ImageMeta {
  std::string image_id;
  int width = 0;   // columns
  int height = 0;  // rows
};

/// A text bounding quadrilateral in canonical form: clockwise on screen
/// (positive shoelace sum in y-down coordinates), starting at the vertex with
/// the smallest x+y (ties: smaller y), simple, with area above
/// kDegenerateArea. Only normalize_quad() produces one.
class Quad {
 public:
  [[nodiscard]] const std::array<Point2, 4>& vertices() const noexcept { return v_; }
  [[nodiscard]] const Point2& operator[](std::size_t i) const { return v_[i]; }
  [[nodiscard]] double area() const;
  [[nodiscard]] bool is_convex() const;

  friend bool operator==(const Quad&, const Quad&) = default;

 private:
  explicit Quad(const std::array<Point2, 4>& v) : v_(v) {}
  friend Quad normalize_quad(const std::array<Point2, 4>& raw, ParseMode mode);

  std::array<Point2, 4> v_;
};

/// Rotated rectangle describing a text region crop. `angle` is measured from
/// +x to the width edge, in [0, pi); width >= height > 0.
struct CropSpec {
  Point2 center;
  double width = 0.0;
  double height = 0.0;
  double angle = 0.0;

  [[nodiscard]] double area() const { return width * height; }
  /// Corners in order: (-w,-h), (+w,-h), (+w,+h), (-w,+h) in the rectangle frame.
  [[nodiscard]] std::array<Point2, 4> corners() const;
};

struct ClampedCrop {
  CropSpec spec;
  bool clamped = false;
};

/// Counters for non-fatal geometry events. Not thread-safe; keep one per worker.
struct GeometryDiagnostics {
  std::size_t hull_fallbacks = 0;  // non-convex quads replaced by their hull

  GeometryDiagnostics& operator+=(const GeometryDiagnostics& o) {
    hull_fallbacks += o.hull_fallbacks;
    return *this;
  }
};

/// Shoelace sum / 2. Positive for clockwise-on-screen polygons.
double signed_area(std::span<const Point2> poly);
double polygon_area(std::span<const Point2> poly);

/// Convex hull with collinear points dropped, positively oriented.
std::vector<Point2> convex_hull(std::span<const Point2> points);

/// Sutherland–Hodgman: clips `subject` against the convex, positively
/// oriented polygon `clip`.
std::vector<Point2> clip_convex(std::span<const Point2> subject, std::span<const Point2> clip);

/// Canonicalizes four raw vertices. Clockwise/counter-clockwise input is
/// accepted in both modes. Self-intersecting input is an error in strict mode
/// and is reordered by angle about the centroid in lenient mode.
/// Throws DegenerateQuad or NonFiniteValue.
Quad normalize_quad(const std::array<Point2, 4>& raw, ParseMode mode = ParseMode::Strict);

/// Intersection over union by convex clipping. Non-convex quads are replaced
/// by their convex hull; each replacement bumps `diag->hull_fallbacks`.
/// Exactly symmetric in its arguments.
double quad_iou(const Quad& a, const Quad& b, GeometryDiagnostics* diag = nullptr);

/// Minimum-area enclosing rectangle by rotating calipers over the convex hull.
CropSpec min_area_rect(std::span<const Point2> points);
CropSpec min_area_rect(const Quad& quad);

/// min_area_rect, optionally grown by `padding` pixels on every side, then
/// shrunk (keeping its angle) to the part inside the image when it sticks out.
/// Throws QuadOutsideImage when the quad does not overlap the image.
ClampedCrop crop_spec_for_quad(const Quad& quad, const ImageMeta& image, double padding = 0.0);

struct CropSpecRow {
  std::string image_id;
  std::string region_id;
  ClampedCrop crop;
};

/// CSV columns: image_id,region_id,cx,cy,w,h,angle_rad,clamped
void write_crop_specs_csv(std::ostream& out, std::span<const CropSpecRow> rows);
std::vector<CropSpecRow> read_crop_specs_csv(std::istream& in);

}  // namespace scriptdet
