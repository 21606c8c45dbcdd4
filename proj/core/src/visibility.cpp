#include "placekit/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "placekit/errors.hpp"
#include "placekit/ply.hpp"

namespace placekit {

namespace {

constexpr double kOccluderTMin = 1e-6;
constexpr double kDepthEps = 1e-9;

Vec3 camera_right(const AnchorCamera& c) { return cross(c.forward, c.up); }

}  // namespace

Ray AnchorCamera::pixel_ray(int col, int row) const {
  const double half = std::tan(deg_to_rad(fov) / 2);
  const double u = (2.0 * (col + 0.5) / resolution - 1.0) * half;
  const double v = (1.0 - 2.0 * (row + 0.5) / resolution) * half;
  return Ray::through(position, forward + camera_right(*this) * u + up * v);
}

std::optional<std::pair<double, double>> AnchorCamera::project(const Vec3& p) const {
  const Vec3 d = p - position;
  const double depth = dot(d, forward);
  if (depth <= kDepthEps) return std::nullopt;
  const double half = std::tan(deg_to_rad(fov) / 2);
  const double u = dot(d, camera_right(*this)) / depth / half;
  const double v = dot(d, up) / depth / half;
  return std::pair{(u + 1.0) * resolution / 2 - 0.5, (1.0 - v) * resolution / 2 - 0.5};
}

AnchorViewpoint anchor_viewpoint(const SceneModel& scene, const Anchor& anchor) {
  const TriangleMesh& mesh = scene.mesh().mesh();
  AnchorViewpoint view;
  std::vector<std::uint32_t> inside;
  Vec3 centroid;
  for (std::uint32_t i = 0; i < mesh.vertices.size(); ++i) {
    if (anchor.box.contains(mesh.vertices[i], -kContactTol)) {
      inside.push_back(i);
      centroid += mesh.vertices[i];
    }
  }
  if (inside.empty()) {
    view.position = anchor.box.center;
  } else {
    centroid *= 1.0 / static_cast<double>(inside.size());
    double best = HUGE_VAL;
    for (const std::uint32_t i : inside) {
      const Vec3 d = mesh.vertices[i] - centroid;
      const double d2 = dot(d, d);
      if (d2 < best) {
        best = d2;
        view.position = mesh.vertices[i];
      }
    }
    view.from_vertices = true;
  }
  view.ignore.assign(mesh.triangles.size(), 0);
  const Aabb region = anchor.box.bounds().inflated(kContactTol);
  scene.mesh().visit_box(region, [&](std::uint32_t tri) {
    const auto& t = mesh.triangles[tri];
    if (anchor.box.contains(mesh.vertices[t[0]], kContactTol) &&
        anchor.box.contains(mesh.vertices[t[1]], kContactTol) &&
        anchor.box.contains(mesh.vertices[t[2]], kContactTol))
      view.ignore[tri] = 1;
  });
  return view;
}

AnchorCamera look_at(const Vec3& position, const Vec3& target, double fov, int resolution) {
  const Vec3 d = target - position;
  if (!(norm(d) > 1e-12)) throw ValidationError("camera target coincides with the camera position");
  AnchorCamera cam;
  cam.position = position;
  cam.forward = normalized(d);
  const Vec3 world_up = std::abs(cam.forward.z) > 0.999 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
  cam.up = normalized(world_up - cam.forward * dot(world_up, cam.forward));
  cam.fov = fov;
  cam.resolution = resolution;
  return cam;
}

AnchorCamera build_anchor_camera(const SceneModel& scene, const Anchor& anchor, const Vec3& target,
                                 const ThresholdConfig& cfg, int resolution) {
  return look_at(anchor_viewpoint(scene, anchor).position, target, cfg.vis_fov, resolution);
}

bool visibility_test(const IndexedMesh& scene, const TriangleMesh& target, const Obb& target_box,
                     const AnchorCamera& camera, std::span<const std::uint8_t> ignore,
                     std::vector<std::uint8_t>* pixels) {
  const int res = camera.resolution;
  if (pixels) pixels->assign(static_cast<std::size_t>(res) * res, 0);
  if (target_box.contains(camera.position, kContactTol)) {
    if (pixels) std::fill(pixels->begin(), pixels->end(), 1);
    return true;
  }
  // Only pixels covering the projected target box can see the target.
  int c0 = 0;
  int c1 = res - 1;
  int r0 = 0;
  int r1 = res - 1;
  {
    double cmin = HUGE_VAL;
    double cmax = -HUGE_VAL;
    double rmin = HUGE_VAL;
    double rmax = -HUGE_VAL;
    bool behind = false;
    const Aabb b = target_box.bounds();
    for (int k = 0; k < 8 && !behind; ++k) {
      const Vec3 corner{k & 1 ? b.max.x : b.min.x, k & 2 ? b.max.y : b.min.y, k & 4 ? b.max.z : b.min.z};
      const auto px = camera.project(corner);
      if (!px) {
        behind = true;
        break;
      }
      cmin = std::min(cmin, px->first);
      cmax = std::max(cmax, px->first);
      rmin = std::min(rmin, px->second);
      rmax = std::max(rmax, px->second);
    }
    if (!behind) {
      c0 = std::max(0, static_cast<int>(std::floor(cmin)) - 1);
      c1 = std::min(res - 1, static_cast<int>(std::ceil(cmax)) + 1);
      r0 = std::max(0, static_cast<int>(std::floor(rmin)) - 1);
      r1 = std::min(res - 1, static_cast<int>(std::ceil(rmax)) + 1);
      if (c0 > c1 || r0 > r1) return false;
    }
  }
  const IndexedMesh object(target);
  bool seen = false;
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      const Ray ray = camera.pixel_ray(col, row);
      const auto hit = raycast_first(object, ray);
      if (!hit) continue;
      if (raycast_any(scene, ray, kOccluderTMin, hit->t - kDepthEps, ignore)) continue;
      seen = true;
      if (!pixels) return true;
      (*pixels)[static_cast<std::size_t>(row) * res + col] = 1;
    }
  }
  return seen;
}

bool asset_visible(const SceneModel& scene, const Asset& asset, const Placement& p,
                   const AnchorViewpoint& view, const ThresholdConfig& cfg, VisibilityMode mode,
                   int resolution_override) {
  if (mode == VisibilityMode::kExact) {
    const PosedAsset posed = pose_asset(asset, p);
    const int res = resolution_override > 0 ? resolution_override : cfg.vis_res_bench;
    if (posed.box.contains(view.position, kContactTol)) return true;
    return visibility_test(scene.mesh(), posed.mesh, posed.box,
                           look_at(view.position, p.t, cfg.vis_fov, res), view.ignore);
  }
  const Obb box{p.t, asset.extents() * 0.5, 0.0};
  const int res = resolution_override > 0 ? resolution_override : cfg.vis_res_dataset;
  if (box.contains(view.position, kContactTol)) return true;
  return visibility_test(scene.mesh(), box_mesh(box), box, look_at(view.position, p.t, cfg.vis_fov, res),
                         view.ignore);
}

bool asset_visible(const SceneModel& scene, const Asset& asset, const Placement& p,
                   const Anchor& anchor, const ThresholdConfig& cfg, VisibilityMode mode) {
  return asset_visible(scene, asset, p, anchor_viewpoint(scene, anchor), cfg, mode);
}

void write_visibility_pgm(const std::filesystem::path& file, const std::vector<std::uint8_t>& pixels,
                          int resolution) {
  std::string out = "P5\n" + std::to_string(resolution) + " " + std::to_string(resolution) + "\n255\n";
  out.reserve(out.size() + pixels.size());
  for (const std::uint8_t v : pixels) out.push_back(static_cast<char>(v ? 255 : 0));
  write_file(file, out);
}

}  // namespace placekit
