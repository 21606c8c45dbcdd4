#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "placekit/geometry.hpp"

namespace placekit {

// A named, annotated object instance that constraints refer to.
struct Anchor {
  int id = 0;
  std::string label;
  Obb box;
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Rgb> colors;

  std::size_t size() const { return positions.size(); }
  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

// Scene mesh, colored point cloud and anchor annotations, all Z-up.
// Immutable once constructed.
class SceneModel {
 public:
  SceneModel(std::string scene_id, TriangleMesh mesh, PointCloud points,
             std::vector<Anchor> anchors);

  const std::string& id() const { return id_; }
  const IndexedMesh& mesh() const { return *mesh_; }
  const PointCloud& points() const { return points_; }
  const std::vector<Anchor>& anchors() const { return anchors_; }

  // Throws LookupError for unknown ids.
  const Anchor& anchor(int id) const;
  const Anchor* find_anchor(int id) const;
  std::vector<const Anchor*> anchors_of_class(std::string_view label) const;
  // Largest instance of a class by box volume (ties: lowest id); nullptr if absent.
  const Anchor* largest_of_class(std::string_view label) const;
  // Sorted, de-duplicated anchor class labels.
  std::vector<std::string> vocabulary() const;
  // Larger horizontal side of the scene mesh bounding box.
  double room_size() const;

 private:
  std::string id_;
  std::shared_ptr<const IndexedMesh> mesh_;
  PointCloud points_;
  std::vector<Anchor> anchors_;
};

// Asset in its canonical frame: bounding box centered at the origin, up is
// +Z and the frontal direction is +Y.
class Asset {
 public:
  // Throws ValidationError unless the mesh bounding box is centered at the
  // origin (within 1e-6) with positive extents.
  Asset(std::string asset_id, TriangleMesh canonical_mesh);

  // Re-centers an arbitrary mesh so that its bounding box is at the origin.
  static Asset from_mesh(std::string asset_id, TriangleMesh mesh);

  const std::string& id() const { return id_; }
  const TriangleMesh& mesh() const { return mesh_; }
  const Vec3& extents() const { return extents_; }
  double height() const { return extents_.z; }

 private:
  std::string id_;
  TriangleMesh mesh_;
  Vec3 extents_;
};

Asset make_box_asset(std::string asset_id, const Vec3& extents);
// L-shaped prism: a full-depth base block plus a tall block over the back
// half, `extents` being the overall size.
Asset make_l_asset(std::string asset_id, const Vec3& extents);

// Asset-center translation plus yaw about +Z.
struct Placement {
  Vec3 t;
  double yaw = 0.0;
  friend bool operator==(const Placement&, const Placement&) = default;
};

struct PosedAsset {
  TriangleMesh mesh;
  Obb box;
};

// v -> R_z(yaw) v + t for every vertex; the box carries the asset extents.
PosedAsset pose_asset(const Asset& asset, const Placement& p);

// Asset bounding cuboid posed like `pose_asset` would pose the mesh.
Obb posed_box(const Asset& asset, const Placement& p);

// Area-weighted surface samples, round(area * density) of them, with colors
// interpolated from the vertices and quantized to 8 bits. Throws
// ValidationError when density is not positive.
PointCloud sample_point_cloud(const TriangleMesh& mesh, double density, std::uint64_t seed);

struct IngestOptions {
  double density = 50.0;  // points / m^2 when no points file is given
  std::uint64_t seed = 0;
};

// Builds a scene from a parsed mesh and the annotation JSON text.
// `points` overrides sampling when present.
SceneModel ingest_scene(TriangleMesh mesh, std::string_view annotation_json,
                        std::optional<PointCloud> points = std::nullopt,
                        const IngestOptions& options = {});

// Reads `<mesh>.ply` and the annotation file; a "points_file" entry is
// resolved relative to the annotation's directory.
SceneModel ingest_scene(const std::filesystem::path& mesh_file,
                        const std::filesystem::path& annotation_file,
                        const IngestOptions& options = {});

// Writes <id>.ply, <id>.json and <id>.points.ply into `dir`.
void export_scene(const SceneModel& scene, const std::filesystem::path& dir);
std::string annotation_json(const SceneModel& scene, std::string_view points_file = {});

// Asset PLY plus JSON sidecar {"asset_id", "up", "frontal", "extents"}.
// Axis labels are signed axes ("+z", "-y", ...); the mesh is rotated so that
// up becomes +Z and frontal becomes +Y before validation.
Asset load_asset(const std::filesystem::path& mesh_file, const std::filesystem::path& sidecar_file);
Asset asset_from_sidecar(TriangleMesh mesh, std::string_view sidecar_json);
void export_asset(const Asset& asset, const std::filesystem::path& dir);
std::string asset_sidecar_json(const Asset& asset);

// Conventional sidecar path: same stem, ".json" extension.
std::filesystem::path sidecar_path_for(const std::filesystem::path& mesh_file);

}  // namespace placekit
