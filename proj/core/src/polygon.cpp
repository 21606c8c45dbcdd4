#include "placekit/polygon.hpp"

#include <algorithm>
#include <limits>

namespace placekit {

double signed_area(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * twice;
}

Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
  Polygon out(subject.begin(), subject.end());
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Vec2 a = clip[e];
    const Vec2 b = clip[(e + 1) % m];
    const Vec2 edge = b - a;
    Polygon in;
    in.swap(out);
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p = in[i];
      const Vec2 q = in[(i + 1) % n];
      const double sp = cross(edge, p - a);
      const double sq = cross(edge, q - a);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double s = sp / (sp - sq);
        out.push_back(p + (q - p) * s);
      }
    }
  }
  return out;
}

Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double convex_iom(std::span<const Vec2> a, std::span<const Vec2> b) {
  const double area_a = area(a);
  const double area_b = area(b);
  const double smaller = std::min(area_a, area_b);
  if (smaller <= 0.0) return 0.0;
  const double inter = area(clip_convex(a, b));
  return std::clamp(inter / smaller, 0.0, 1.0);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(p - (a + ab * s));
}

namespace {

// Largest gap along the outward edge normals of `a`; <= 0 means no edge of
// `a` separates the two polygons.
double max_separation(std::span<const Vec2> a, std::span<const Vec2> b) {
  double best = -std::numeric_limits<double>::infinity();
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = a[(i + 1) % n] - a[i];
    const double len = norm(e);
    if (len == 0.0) continue;
    const Vec2 normal{e.y / len, -e.x / len};
    double min_b = std::numeric_limits<double>::infinity();
    for (const Vec2& q : b) min_b = std::min(min_b, dot(normal, q - a[i]));
    best = std::max(best, min_b);
  }
  return best;
}

}  // namespace

double convex_distance(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  if (max_separation(a, b) <= 0.0 && max_separation(b, a) <= 0.0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const auto scan = [&best](std::span<const Vec2> pts, std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    for (const Vec2& p : pts)
      for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
  };
  scan(a, b);
  scan(b, a);
  return best;
}

bool point_in_convex(const Vec2& p, std::span<const Vec2> poly, double tol) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = poly[(i + 1) % n] - poly[i];
    const double len = norm(e);
    if (len == 0.0) continue;
    if (cross(e, p - poly[i]) / len < -tol) return false;
  }
  return true;
}

}  // namespace placekit
