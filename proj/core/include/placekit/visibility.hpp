#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "placekit/config.hpp"
#include "placekit/scene.hpp"

namespace placekit {

enum class VisibilityMode {
  kExact,   // posed asset mesh, benchmark resolution
  kApprox,  // asset bounding cuboid at rotation bin 0, dataset resolution
};

struct AnchorCamera {
  Vec3 position;
  Vec3 forward{0, 1, 0};
  Vec3 up{0, 0, 1};
  double fov = 60.0;  // degrees
  int resolution = 256;

  // Ray through the center of pixel (col, row); row 0 is the top row.
  Ray pixel_ray(int col, int row) const;
  // Pixel containing the projection of `p`, or nullopt when `p` is behind
  // the camera.
  std::optional<std::pair<double, double>> project(const Vec3& p) const;
};

// Where a camera sits inside an anchor and which scene triangles belong to
// the anchor itself (those are transparent for its own view).
struct AnchorViewpoint {
  Vec3 position;
  bool from_vertices = false;  // false: fell back to the box center
  std::vector<std::uint8_t> ignore;
};

// Camera position: the scene vertex nearest to the centroid of the scene
// vertices strictly inside the anchor box; the box center when the box
// holds no vertex. Triangles lying entirely inside the anchor box are
// ignored as occluders.
AnchorViewpoint anchor_viewpoint(const SceneModel& scene, const Anchor& anchor);

// Looks from `position` toward `target` with world +Z as up (+X when the
// view is nearly vertical). Throws ValidationError if target == position.
AnchorCamera look_at(const Vec3& position, const Vec3& target, double fov, int resolution);

AnchorCamera build_anchor_camera(const SceneModel& scene, const Anchor& anchor, const Vec3& target,
                                 const ThresholdConfig& cfg, int resolution);

// Renders by casting one ray per pixel: a pixel sees the target when its
// nearest target hit is closer than every non-ignored scene hit. Returns
// true when any pixel sees the target. A camera inside `target_box` always
// sees it. `pixels`, when given, receives a resolution^2 row-major mask.
bool visibility_test(const IndexedMesh& scene, const TriangleMesh& target, const Obb& target_box,
                     const AnchorCamera& camera, std::span<const std::uint8_t> ignore = {},
                     std::vector<std::uint8_t>* pixels = nullptr);

// Asset visibility from an anchor in the given mode.
bool asset_visible(const SceneModel& scene, const Asset& asset, const Placement& p,
                   const Anchor& anchor, const ThresholdConfig& cfg, VisibilityMode mode);
bool asset_visible(const SceneModel& scene, const Asset& asset, const Placement& p,
                   const AnchorViewpoint& view, const ThresholdConfig& cfg, VisibilityMode mode,
                   int resolution_override = 0);

// Binary PGM (P5) of a pixel mask, 255 where the target is seen.
void write_visibility_pgm(const std::filesystem::path& file, const std::vector<std::uint8_t>& pixels,
                          int resolution);

}  // namespace placekit
