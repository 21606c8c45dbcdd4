#include "placekit/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "placekit/errors.hpp"
#include "placekit/polygon.hpp"

namespace placekit {

double wrap_angle(double radians) {
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

void Aabb::extend(const Vec3& p) {
  min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
  max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
}

void Aabb::extend(const Aabb& b) {
  if (b.empty()) return;
  extend(b.min);
  extend(b.max);
}

std::array<Vec2, 4> Obb::footprint() const {
  const Vec2 c{center.x, center.y};
  const Vec2 ax = axis_x() * half_extents.x;
  const Vec2 ay = axis_y() * half_extents.y;
  return {c - ax - ay, c + ax - ay, c + ax + ay, c - ax + ay};
}

bool Obb::contains(const Vec3& p, double tol) const {
  const Vec2 d{p.x - center.x, p.y - center.y};
  return std::abs(dot(d, axis_x())) <= half_extents.x + tol &&
         std::abs(dot(d, axis_y())) <= half_extents.y + tol &&
         std::abs(p.z - center.z) <= half_extents.z + tol;
}

Aabb Obb::bounds() const {
  Aabb box;
  for (const Vec2& c : footprint()) {
    box.extend(Vec3{c.x, c.y, center.z - half_extents.z});
    box.extend(Vec3{c.x, c.y, center.z + half_extents.z});
  }
  return box;
}

void validate(const Obb& box) {
  if (!is_finite(box.center) || !is_finite(box.half_extents) || !std::isfinite(box.yaw))
    throw ValidationError("oriented box has non-finite fields");
  if (box.half_extents.x <= 0.0 || box.half_extents.y <= 0.0 || box.half_extents.z <= 0.0)
    throw ValidationError("oriented box half extents must be strictly positive");
}

Ray Ray::through(const Vec3& origin, const Vec3& direction) {
  const double n = norm(direction);
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("ray direction must be non-zero");
  return {origin, direction * (1.0 / n)};
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices) box.extend(v);
  return box;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

double TriangleMesh::area() const {
  double total = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto [a, b, c] = corners(i);
    total += triangle_area(a, b, c);
  }
  return total;
}

void TriangleMesh::append(const TriangleMesh& other) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  const bool colored = !colors.empty() || vertices.empty();
  if (colored) {
    if (other.colors.empty())
      colors.resize(vertices.size() + other.vertices.size());
    else
      colors.insert(colors.end(), other.colors.begin(), other.colors.end());
  }
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const Triangle& t : other.triangles) triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

void validate(const TriangleMesh& mesh) {
  if (mesh.triangles.empty()) throw ValidationError("mesh has no triangles");
  for (const Vec3& v : mesh.vertices)
    if (!is_finite(v)) throw ValidationError("mesh has a non-finite vertex");
  const auto n = mesh.vertices.size();
  for (const Triangle& t : mesh.triangles)
    for (std::uint32_t i : t)
      if (i >= n) throw ValidationError("triangle index " + std::to_string(i) + " out of range");
  if (!mesh.colors.empty() && mesh.colors.size() != n)
    throw ValidationError("mesh color count does not match vertex count");
}

TriangleMesh box_mesh(const Obb& box, const Rgb& color) {
  TriangleMesh mesh;
  mesh.vertices.reserve(8);
  const Vec3& h = box.half_extents;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local{(i & 1) ? h.x : -h.x, (i & 2) ? h.y : -h.y, (i & 4) ? h.z : -h.z};
    mesh.vertices.push_back(rotate_z(local, box.yaw) + box.center);
  }
  mesh.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 5}, {0, 5, 4},
                    {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  mesh.colors.assign(8, color);
  return mesh;
}

std::optional<double> intersect_ray_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                             const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = cross(ray.direction, e2);
  const double det = dot(e1, p);
  if (std::abs(det) <= 1e-12 * norm(e1) * norm(e2)) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = ray.origin - a;
  const double u = dot(s, p) * inv;
  if (u < -kBarycentricEps || u > 1.0 + kBarycentricEps) return std::nullopt;
  const Vec3 q = cross(s, e1);
  const double v = dot(ray.direction, q) * inv;
  if (v < -kBarycentricEps || u + v > 1.0 + kBarycentricEps) return std::nullopt;
  return dot(e2, q) * inv;
}

// ---------------------------------------------------------------------------
// IndexedMesh

IndexedMesh::IndexedMesh(TriangleMesh mesh) : mesh_(std::move(mesh)) {
  validate(mesh_);
  bounds_ = mesh_.bounds();
  const std::size_t n = mesh_.triangles.size();
  normals_.resize(n);
  std::vector<Vec3> centroids(n);
  std::vector<Aabb> boxes(n);
  order_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b, c] = mesh_.corners(i);
    const Vec3 nrm = cross(b - a, c - a);
    if (0.5 * norm(nrm) < kDegenerateArea) continue;
    normals_[i] = normalized(nrm);
    centroids[i] = (a + b + c) * (1.0 / 3.0);
    boxes[i].extend(a);
    boxes[i].extend(b);
    boxes[i].extend(c);
    order_.push_back(static_cast<std::uint32_t>(i));
  }
  if (!order_.empty()) {
    nodes_.reserve(2 * order_.size() / 4 + 2);
    build(0, static_cast<std::uint32_t>(order_.size()), centroids, boxes);
  }
}

std::uint32_t IndexedMesh::build(std::uint32_t begin, std::uint32_t end,
                                 std::vector<Vec3>& centroids, std::vector<Aabb>& boxes) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.extend(boxes[order_[i]]);
    centroid_box.extend(centroids[order_[i]]);
  }
  // Slack keeps grazing rays inside the boxes of the triangles they touch.
  const double slack = 1e-9 * (1.0 + std::max({std::abs(box.min.x), std::abs(box.min.y),
                                               std::abs(box.min.z), std::abs(box.max.x),
                                               std::abs(box.max.y), std::abs(box.max.z)}));
  box = box.inflated(slack);
  constexpr std::uint32_t kLeafSize = 4;
  if (end - begin <= kLeafSize) {
    nodes_[index] = Node{box, begin, end - begin};
    return index;
  }
  const Vec3 extent = centroid_box.size();
  int axis = 0;
  if (extent.y > extent.x) axis = 1;
  if (extent.z > extent[axis]) axis = 2;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroids[a][axis];
                     const double cb = centroids[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  build(begin, mid, centroids, boxes);
  const std::uint32_t right = build(mid, end, centroids, boxes);
  nodes_[index] = Node{box, right, 0};
  return index;
}

bool IndexedMesh::ray_box(const Ray& ray, const Vec3& inv, const Aabb& box, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    const double lo = box.min[axis];
    const double hi = box.max[axis];
    if (d == 0.0) {
      if (o < lo || o > hi) return false;
      continue;
    }
    double ta = (lo - o) * inv[axis];
    double tb = (hi - o) * inv[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

HitList raycast_all(const IndexedMesh& mesh, const Ray& ray) {
  HitList hits;
  const double t_max = HUGE_VAL;
  mesh.visit_ray(ray, t_max, [&](std::uint32_t tri) {
    const auto [a, b, c] = mesh.mesh().corners(tri);
    if (const auto t = intersect_ray_triangle(ray, a, b, c); t && *t >= 0.0)
      hits.push_back({*t, ray.at(*t), tri});
  });
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.t < b.t || (a.t == b.t && a.triangle < b.triangle);
  });
  return hits;
}

HitList raycast_all(const TriangleMesh& mesh, const Ray& ray) {
  return raycast_all(IndexedMesh(mesh), ray);
}

std::optional<Hit> raycast_first(const IndexedMesh& mesh, const Ray& ray, double t_min,
                                 double t_max, std::span<const std::uint8_t> ignore) {
  std::optional<Hit> best;
  double limit = t_max;
  mesh.visit_ray(ray, limit, [&](std::uint32_t tri) {
    if (!ignore.empty() && ignore[tri]) return;
    const auto [a, b, c] = mesh.mesh().corners(tri);
    const auto t = intersect_ray_triangle(ray, a, b, c);
    if (!t || *t < t_min || *t > limit) return;
    if (best && (*t > best->t || (*t == best->t && tri > best->triangle))) return;
    best = Hit{*t, ray.at(*t), tri};
    limit = *t;
  });
  return best;
}

bool raycast_any(const IndexedMesh& mesh, const Ray& ray, double t_min, double t_max,
                 std::span<const std::uint8_t> ignore) {
  bool found = false;
  mesh.visit_ray(ray, t_max, [&](std::uint32_t tri) {
    if (!ignore.empty() && ignore[tri]) return false;
    const auto [a, b, c] = mesh.mesh().corners(tri);
    const auto t = intersect_ray_triangle(ray, a, b, c);
    found = t && *t >= t_min && *t < t_max;
    return found;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Triangle overlap

namespace {

bool is_degenerate(const std::array<Vec3, 3>& t) {
  return triangle_area(t[0], t[1], t[2]) < kDegenerateArea;
}

// True when `axis` separates the triangles by more than tol.
bool separated_on(const Vec3& axis, double scale, const std::array<Vec3, 3>& a,
                  const std::array<Vec3, 3>& b, double tol) {
  const double len = norm(axis);
  if (len <= 1e-12 * scale) return false;
  const Vec3 n = axis * (1.0 / len);
  double a_lo = HUGE_VAL, a_hi = -HUGE_VAL, b_lo = HUGE_VAL, b_hi = -HUGE_VAL;
  for (const Vec3& p : a) {
    const double d = dot(n, p);
    a_lo = std::min(a_lo, d);
    a_hi = std::max(a_hi, d);
  }
  for (const Vec3& p : b) {
    const double d = dot(n, p);
    b_lo = std::min(b_lo, d);
    b_hi = std::max(b_hi, d);
  }
  return std::max(b_lo - a_hi, a_lo - b_hi) > tol;
}

}  // namespace

bool triangles_intersect(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b, double tol) {
  if (is_degenerate(a) || is_degenerate(b)) return false;
  const std::array<Vec3, 3> ea{a[1] - a[0], a[2] - a[1], a[0] - a[2]};
  const std::array<Vec3, 3> eb{b[1] - b[0], b[2] - b[1], b[0] - b[2]};
  const Vec3 na = cross(ea[0], a[2] - a[0]);
  const Vec3 nb = cross(eb[0], b[2] - b[0]);
  if (separated_on(na, norm(ea[0]) * norm(ea[2]), a, b, tol)) return false;
  if (separated_on(nb, norm(eb[0]) * norm(eb[2]), a, b, tol)) return false;
  for (const Vec3& u : ea)
    for (const Vec3& v : eb)
      if (separated_on(cross(u, v), norm(u) * norm(v), a, b, tol)) return false;
  // In-plane edge normals settle the coplanar and near-coplanar cases.
  const double na_len = norm(na);
  const double nb_len = norm(nb);
  for (const Vec3& u : ea)
    if (separated_on(cross(na, u), na_len * norm(u), a, b, tol)) return false;
  for (const Vec3& v : eb)
    if (separated_on(cross(nb, v), nb_len * norm(v), a, b, tol)) return false;
  return true;
}

bool meshes_intersect(const TriangleMesh& a, const IndexedMesh& b, double tol) {
  const double pad = std::max(tol, 0.0) + 1e-9;
  for (std::size_t i = 0; i < a.triangles.size(); ++i) {
    const auto ta = a.corners(i);
    if (is_degenerate(ta)) continue;
    Aabb box;
    for (const Vec3& p : ta) box.extend(p);
    bool hit = false;
    b.visit_box(box.inflated(pad), [&](std::uint32_t j) {
      hit = triangles_intersect(ta, b.mesh().corners(j), tol);
      return hit;
    });
    if (hit) return true;
  }
  return false;
}

bool meshes_intersect(const TriangleMesh& a, const TriangleMesh& b, double tol) {
  return meshes_intersect(a, IndexedMesh(b), tol);
}

// ---------------------------------------------------------------------------
// Box measures

double obb_min_distance(const Obb& a, const Obb& b) {
  // Both boxes are vertical prisms, so the squared distance splits into a
  // footprint term and a height term.
  const auto fa = a.footprint();
  const auto fb = b.footprint();
  const double dxy = convex_distance(fa, fb);
  const Interval za = a.z_span();
  const Interval zb = b.z_span();
  const double dz = std::max(0.0, std::max(za.lo - zb.hi, zb.lo - za.hi));
  return std::sqrt(dxy * dxy + dz * dz);
}

double footprint_iom(const Obb& a, const Obb& b) {
  const auto fa = a.footprint();
  const auto fb = b.footprint();
  return convex_iom(fa, fb);
}

double interval_iom(const Interval& a, const Interval& b) {
  const double la = a.length();
  const double lb = b.length();
  if (la <= 0.0 && lb <= 0.0) return a.lo == b.lo ? 1.0 : 0.0;
  if (la <= 0.0) return (a.lo >= b.lo && a.lo <= b.hi) ? 1.0 : 0.0;
  if (lb <= 0.0) return (b.lo >= a.lo && b.lo <= a.hi) ? 1.0 : 0.0;
  const double overlap = std::max(0.0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo));
  return std::clamp(overlap / std::min(la, lb), 0.0, 1.0);
}

}  // namespace placekit
