#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

namespace placekit {

// Two touching surfaces closer than this count as being in contact.
inline constexpr double kContactTol = 1e-6;
// Barycentric slack for ray/triangle tests; grazing hits on shared edges
// are kept so layered heightmaps do not lose intersections.
inline constexpr double kBarycentricEps = 1e-9;
// Triangles with less area (m^2) are skipped by ray casts and overlap tests.
inline constexpr double kDegenerateArea = 1e-14;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  return n > 0.0 ? a * (1.0 / n) : Vec3{};
}
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator*(const Vec2& a, double s) { return {a.x * s, a.y * s}; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

// Rotation about +Z.
inline Vec3 rotate_z(const Vec3& v, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}
inline Vec2 rotate(const Vec2& v, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Wraps any finite angle into [0, 2*pi).
double wrap_angle(double radians);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

struct Aabb {
  Vec3 min{HUGE_VAL, HUGE_VAL, HUGE_VAL};
  Vec3 max{-HUGE_VAL, -HUGE_VAL, -HUGE_VAL};

  bool empty() const { return min.x > max.x || min.y > max.y || min.z > max.z; }
  void extend(const Vec3& p);
  void extend(const Aabb& b);
  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 size() const { return max - min; }
  Aabb inflated(double r) const { return {min - Vec3{r, r, r}, max + Vec3{r, r, r}}; }
  bool overlaps(const Aabb& o) const {
    return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y &&
           min.z <= o.max.z && o.min.z <= max.z;
  }
};

// Box rotated about Z only. `half_extents` are expressed in the box frame
// whose X axis is (cos yaw, sin yaw, 0).
struct Obb {
  Vec3 center;
  Vec3 half_extents{0.5, 0.5, 0.5};
  double yaw = 0.0;

  Vec2 axis_x() const { return {std::cos(yaw), std::sin(yaw)}; }
  Vec2 axis_y() const { return {-std::sin(yaw), std::cos(yaw)}; }
  // Counter-clockwise footprint corners.
  std::array<Vec2, 4> footprint() const;
  Interval z_span() const { return {center.z - half_extents.z, center.z + half_extents.z}; }
  double footprint_area() const { return 4.0 * half_extents.x * half_extents.y; }
  double volume() const { return 8.0 * half_extents.x * half_extents.y * half_extents.z; }
  bool contains(const Vec3& p, double tol = 0.0) const;
  Aabb bounds() const;
  friend bool operator==(const Obb&, const Obb&) = default;
};

// Throws ValidationError unless all fields are finite and extents positive.
void validate(const Obb& box);

struct Ray {
  Vec3 origin;
  Vec3 direction{0.0, 0.0, -1.0};

  // Normalizes the direction; throws ValidationError on a zero vector.
  static Ray through(const Vec3& origin, const Vec3& direction);
  Vec3 at(double t) const { return origin + direction * t; }
};

struct Rgb {
  double r = 0.5;
  double g = 0.5;
  double b = 0.5;
  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

using Triangle = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Rgb> colors;  // empty, or one per vertex

  std::array<Vec3, 3> corners(std::size_t tri) const {
    const auto& t = triangles[tri];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }
  Aabb bounds() const;
  double area() const;
  // Appends another mesh, re-basing its indices.
  void append(const TriangleMesh& other);
  friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;
};

// Throws ValidationError on out-of-range indices, non-finite vertices,
// empty triangle lists, or a color array of the wrong length.
void validate(const TriangleMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// Closed 12-triangle mesh of a box, outward (counter-clockwise) winding.
TriangleMesh box_mesh(const Obb& box, const Rgb& color = {});

struct Hit {
  double t = 0.0;
  Vec3 point;
  std::uint32_t triangle = 0;
};

using HitList = std::vector<Hit>;

// Ray parameter of the intersection with triangle (a, b, c), if any. Rays
// parallel to the triangle plane never hit.
std::optional<double> intersect_ray_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                             const Vec3& c);

// Triangle mesh with a bounding volume hierarchy. Immutable after
// construction and safe to share between threads.
class IndexedMesh {
 public:
  explicit IndexedMesh(TriangleMesh mesh);

  const TriangleMesh& mesh() const { return mesh_; }
  const Aabb& bounds() const { return bounds_; }
  std::size_t triangle_count() const { return mesh_.triangles.size(); }
  // Unit normal from the winding; zero for degenerate triangles.
  const Vec3& normal(std::size_t tri) const { return normals_[tri]; }
  bool degenerate(std::size_t tri) const { return normals_[tri] == Vec3{}; }

  // Visits triangles whose leaf boxes the ray enters within [0, t_max].
  // `t_max` is re-read between nodes so a visitor may shrink it. A visitor
  // returning bool stops the traversal by returning true.
  template <class Visit>
  void visit_ray(const Ray& ray, const double& t_max, Visit&& visit) const;
  // Visits triangles whose leaf boxes overlap `box`; same early-exit rule.
  template <class Visit>
  void visit_box(const Aabb& box, Visit&& visit) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // first primitive for leaves, right child otherwise
    std::uint32_t count = 0;  // 0 for interior nodes
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids,
                      std::vector<Aabb>& boxes);
  static bool ray_box(const Ray& ray, const Vec3& inv, const Aabb& box, double t_max);

  TriangleMesh mesh_;
  Aabb bounds_;
  std::vector<Vec3> normals_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

// Every intersection with t >= 0, sorted by t then triangle index.
HitList raycast_all(const IndexedMesh& mesh, const Ray& ray);
HitList raycast_all(const TriangleMesh& mesh, const Ray& ray);

// Nearest hit with t in [t_min, t_max]. `ignore`, when non-empty, holds one
// flag per triangle; flagged triangles are transparent.
std::optional<Hit> raycast_first(const IndexedMesh& mesh, const Ray& ray, double t_min = 0.0,
                                 double t_max = HUGE_VAL,
                                 std::span<const std::uint8_t> ignore = {});

// True when any triangle is hit with t in [t_min, t_max).
bool raycast_any(const IndexedMesh& mesh, const Ray& ray, double t_min, double t_max,
                 std::span<const std::uint8_t> ignore = {});

// Separating-axis test between two triangles. The triangles count as
// intersecting unless some axis separates them by more than `tol`; a
// negative `tol` therefore tolerates surface contact up to |tol| of overlap.
bool triangles_intersect(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b,
                         double tol = kContactTol);

// True iff some triangle of `a` intersects some triangle of `b`; contact
// within kContactTol counts.
bool meshes_intersect(const TriangleMesh& a, const IndexedMesh& b, double tol = kContactTol);
bool meshes_intersect(const TriangleMesh& a, const TriangleMesh& b, double tol = kContactTol);

// True iff the meshes overlap by more than kContactTol (resting contact and
// coplanar touching faces do not count).
inline bool meshes_penetrate(const TriangleMesh& a, const IndexedMesh& b) {
  return meshes_intersect(a, b, -kContactTol);
}

// Minimum Euclidean distance between the two solid boxes.
double obb_min_distance(const Obb& a, const Obb& b);

// Footprint intersection area over the smaller footprint area.
double footprint_iom(const Obb& a, const Obb& b);

// Overlap length over the smaller length. Two degenerate intervals give 1
// when equal; a degenerate interval against a proper one gives 1 when it
// lies inside it.
double interval_iom(const Interval& a, const Interval& b);

// ---------------------------------------------------------------------------

namespace detail {
template <class Visit>
bool visit_one(Visit& visit, std::uint32_t tri) {
  if constexpr (std::is_same_v<decltype(visit(tri)), bool>) {
    return visit(tri);
  } else {
    visit(tri);
    return false;
  }
}
}  // namespace detail

template <class Visit>
void IndexedMesh::visit_ray(const Ray& ray, const double& t_max, Visit&& visit) const {
  if (nodes_.empty()) return;
  const Vec3 inv{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(ray, inv, node.box, t_max)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
        if (detail::visit_one(visit, order_[i])) return;
    } else {
      const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[top++] = node.first;
      stack[top++] = self + 1;
    }
  }
}

template <class Visit>
void IndexedMesh::visit_box(const Aabb& box, Visit&& visit) const {
  if (nodes_.empty()) return;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.box.overlaps(box)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
        if (detail::visit_one(visit, order_[i])) return;
    } else {
      const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[top++] = node.first;
      stack[top++] = self + 1;
    }
  }
}

}  // namespace placekit
