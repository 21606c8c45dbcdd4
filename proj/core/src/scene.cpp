#include "placekit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_set>

#include "placekit/errors.hpp"
#include "placekit/ply.hpp"
#include "placekit/random.hpp"

namespace placekit {

using nlohmann::json;

namespace {

void validate_colors(const std::vector<Rgb>& colors) {
  for (const Rgb& c : colors)
    for (double v : {c.r, c.g, c.b})
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("color channel outside [0, 1]");
}

double quantize(double c) { return std::round(std::clamp(c, 0.0, 1.0) * 255.0) / 255.0; }

Vec3 vec_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + " must be [x, y, z]");
  for (const auto& v : j)
    if (!v.is_number()) throw ValidationError(std::string(what) + " must be numeric");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed ") + what + " JSON: " + e.what(), e.byte);
  }
}

}  // namespace

SceneModel::SceneModel(std::string scene_id, TriangleMesh mesh, PointCloud points,
                       std::vector<Anchor> anchors)
    : id_(std::move(scene_id)), points_(std::move(points)), anchors_(std::move(anchors)) {
  validate(mesh);
  if (points_.positions.empty()) throw ValidationError("scene point cloud is empty");
  if (points_.colors.size() != points_.positions.size())
    throw ValidationError("point cloud needs one color per point");
  for (const Vec3& p : points_.positions)
    if (!is_finite(p)) throw ValidationError("non-finite point position");
  validate_colors(points_.colors);
  validate_colors(mesh.colors);
  std::unordered_set<int> ids;
  for (Anchor& a : anchors_) {
    if (a.label.empty()) throw ValidationError("anchor " + std::to_string(a.id) + " has no class");
    if (!ids.insert(a.id).second) throw ValidationError("duplicate anchor id " + std::to_string(a.id));
    validate(a.box);
    a.box.yaw = wrap_angle(a.box.yaw);
  }
  mesh_ = std::make_shared<const IndexedMesh>(std::move(mesh));
}

const Anchor& SceneModel::anchor(int id) const {
  if (const Anchor* a = find_anchor(id)) return *a;
  throw LookupError("scene " + id_ + " has no anchor " + std::to_string(id));
}

const Anchor* SceneModel::find_anchor(int id) const {
  for (const Anchor& a : anchors_)
    if (a.id == id) return &a;
  return nullptr;
}

std::vector<const Anchor*> SceneModel::anchors_of_class(std::string_view label) const {
  std::vector<const Anchor*> out;
  for (const Anchor& a : anchors_)
    if (a.label == label) out.push_back(&a);
  return out;
}

const Anchor* SceneModel::largest_of_class(std::string_view label) const {
  const Anchor* best = nullptr;
  for (const Anchor& a : anchors_) {
    if (a.label != label) continue;
    if (!best || a.box.volume() > best->box.volume() ||
        (a.box.volume() == best->box.volume() && a.id < best->id))
      best = &a;
  }
  return best;
}

std::vector<std::string> SceneModel::vocabulary() const {
  std::set<std::string> labels;
  for (const Anchor& a : anchors_) labels.insert(a.label);
  return {labels.begin(), labels.end()};
}

double SceneModel::room_size() const {
  const Vec3 s = mesh_->bounds().size();
  return std::max(s.x, s.y);
}

Asset::Asset(std::string asset_id, TriangleMesh canonical_mesh)
    : id_(std::move(asset_id)), mesh_(std::move(canonical_mesh)) {
  validate(mesh_);
  const Aabb b = mesh_.bounds();
  const Vec3 c = b.center();
  if (std::abs(c.x) > 1e-6 || std::abs(c.y) > 1e-6 || std::abs(c.z) > 1e-6)
    throw ValidationError("asset mesh bounding box is not centered at the origin");
  extents_ = b.size();
  if (!(extents_.x > 0.0 && extents_.y > 0.0 && extents_.z > 0.0))
    throw ValidationError("asset extents must be positive");
}

Asset Asset::from_mesh(std::string asset_id, TriangleMesh mesh) {
  validate(mesh);
  const Vec3 c = mesh.bounds().center();
  for (Vec3& v : mesh.vertices) v -= c;
  return Asset(std::move(asset_id), std::move(mesh));
}

Asset make_box_asset(std::string asset_id, const Vec3& extents) {
  return Asset(std::move(asset_id), box_mesh(Obb{{}, extents * 0.5, 0.0}));
}

Asset make_l_asset(std::string asset_id, const Vec3& extents) {
  const Vec3 h = extents * 0.5;
  TriangleMesh mesh = box_mesh(Obb{{0.0, 0.0, -h.z / 2}, {h.x, h.y, h.z / 2}, 0.0});
  mesh.append(box_mesh(Obb{{0.0, -h.y / 2, h.z / 2}, {h.x, h.y / 2, h.z / 2}, 0.0}));
  return Asset(std::move(asset_id), std::move(mesh));
}

PosedAsset pose_asset(const Asset& asset, const Placement& p) {
  PosedAsset out;
  out.mesh = asset.mesh();
  const double c = std::cos(p.yaw);
  const double s = std::sin(p.yaw);
  for (Vec3& v : out.mesh.vertices) v = Vec3{c * v.x - s * v.y + p.t.x, s * v.x + c * v.y + p.t.y, v.z + p.t.z};
  out.box = posed_box(asset, p);
  return out;
}

Obb posed_box(const Asset& asset, const Placement& p) {
  return Obb{p.t, asset.extents() * 0.5, wrap_angle(p.yaw)};
}

PointCloud sample_point_cloud(const TriangleMesh& mesh, double density, std::uint64_t seed) {
  if (!(density > 0.0) || !std::isfinite(density))
    throw ValidationError("point density must be positive");
  validate(mesh);
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto [a, b, c] = mesh.corners(i);
    total += triangle_area(a, b, c);
    cumulative[i] = total;
  }
  const auto count = static_cast<std::size_t>(std::llround(total * density));
  PointCloud cloud;
  cloud.positions.reserve(count);
  cloud.colors.reserve(count);
  Rng rng(seed);
  const bool colored = !mesh.colors.empty();
  for (std::size_t k = 0; k < count; ++k) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto tri = static_cast<std::size_t>(it - cumulative.begin());
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const double w = 1.0 - u - v;
    const auto& t = mesh.triangles[tri];
    cloud.positions.push_back(mesh.vertices[t[0]] * w + mesh.vertices[t[1]] * u +
                              mesh.vertices[t[2]] * v);
    Rgb color;
    if (colored) {
      const Rgb& a = mesh.colors[t[0]];
      const Rgb& b = mesh.colors[t[1]];
      const Rgb& c = mesh.colors[t[2]];
      color = {a.r * w + b.r * u + c.r * v, a.g * w + b.g * u + c.g * v, a.b * w + b.b * u + c.b * v};
    }
    cloud.colors.push_back({quantize(color.r), quantize(color.g), quantize(color.b)});
  }
  return cloud;
}

namespace {

struct Annotation {
  std::string scene_id;
  std::vector<Anchor> anchors;
  std::optional<std::string> points_file;
};

Annotation parse_annotation(std::string_view text) {
  const json j = parse_json(text, "annotation");
  if (!j.is_object()) throw ValidationError("annotation must be a JSON object");
  Annotation out;
  try {
    out.scene_id = j.at("scene_id").get<std::string>();
    for (const json& a : j.at("anchors")) {
      Anchor anchor;
      anchor.id = a.at("id").get<int>();
      anchor.label = a.at("class").get<std::string>();
      anchor.box.center = vec_from_json(a.at("center"), "center");
      anchor.box.half_extents = vec_from_json(a.at("half_extents"), "half_extents");
      anchor.box.yaw = a.value("yaw", 0.0);
      validate(anchor.box);
      out.anchors.push_back(std::move(anchor));
    }
    if (j.contains("points_file") && !j["points_file"].is_null())
      out.points_file = j["points_file"].get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid annotation: ") + e.what());
  }
  return out;
}

}  // namespace

SceneModel ingest_scene(TriangleMesh mesh, std::string_view annotation_text,
                        std::optional<PointCloud> points, const IngestOptions& options) {
  Annotation anno = parse_annotation(annotation_text);
  validate(mesh);
  PointCloud cloud = points ? std::move(*points) : sample_point_cloud(mesh, options.density, options.seed);
  return SceneModel(std::move(anno.scene_id), std::move(mesh), std::move(cloud),
                    std::move(anno.anchors));
}

SceneModel ingest_scene(const std::filesystem::path& mesh_file,
                        const std::filesystem::path& annotation_file, const IngestOptions& options) {
  TriangleMesh mesh = read_ply(mesh_file);
  const std::string text = read_file(annotation_file);
  const Annotation anno = parse_annotation(text);
  std::optional<PointCloud> points;
  if (anno.points_file) points = read_point_ply(annotation_file.parent_path() / *anno.points_file);
  return ingest_scene(std::move(mesh), text, std::move(points), options);
}

std::string annotation_json(const SceneModel& scene, std::string_view points_file) {
  json j;
  j["scene_id"] = scene.id();
  j["anchors"] = json::array();
  for (const Anchor& a : scene.anchors()) {
    j["anchors"].push_back({{"id", a.id},
                            {"class", a.label},
                            {"center", vec_to_json(a.box.center)},
                            {"half_extents", vec_to_json(a.box.half_extents)},
                            {"yaw", a.box.yaw}});
  }
  if (!points_file.empty()) j["points_file"] = std::string(points_file);
  return j.dump(2) + "\n";
}

void export_scene(const SceneModel& scene, const std::filesystem::path& dir) {
  const std::string points_name = scene.id() + ".points.ply";
  write_ply(dir / (scene.id() + ".ply"), scene.mesh().mesh());
  write_point_ply(dir / points_name, scene.points());
  write_file(dir / (scene.id() + ".json"), annotation_json(scene, points_name));
}

namespace {

Vec3 axis_from_label(const std::string& label) {
  if (label.size() != 2 || (label[0] != '+' && label[0] != '-'))
    throw ValidationError("axis label must look like \"+z\", got \"" + label + "\"");
  const double s = label[0] == '+' ? 1.0 : -1.0;
  switch (label[1]) {
    case 'x':
    case 'X':
      return {s, 0.0, 0.0};
    case 'y':
    case 'Y':
      return {0.0, s, 0.0};
    case 'z':
    case 'Z':
      return {0.0, 0.0, s};
    default:
      throw ValidationError("unknown axis \"" + label + "\"");
  }
}

}  // namespace

Asset asset_from_sidecar(TriangleMesh mesh, std::string_view sidecar_text) {
  const json j = parse_json(sidecar_text, "asset sidecar");
  std::string id;
  Vec3 up{0, 0, 1};
  Vec3 frontal{0, 1, 0};
  std::optional<Vec3> extents;
  try {
    id = j.at("asset_id").get<std::string>();
    if (j.contains("up")) up = axis_from_label(j["up"].get<std::string>());
    if (j.contains("frontal")) frontal = axis_from_label(j["frontal"].get<std::string>());
    if (j.contains("extents")) extents = vec_from_json(j["extents"], "extents");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid asset sidecar: ") + e.what());
  }
  if (dot(up, frontal) != 0.0) throw ValidationError("asset up and frontal axes must differ");
  // Rows of the re-axing rotation: new x = frontal x up, new y = frontal, new z = up.
  const Vec3 side = cross(frontal, up);
  for (Vec3& v : mesh.vertices) v = Vec3{dot(side, v), dot(frontal, v), dot(up, v)};
  Asset asset = Asset::from_mesh(std::move(id), std::move(mesh));
  if (extents) {
    const Vec3 d = asset.extents() - *extents;
    if (std::abs(d.x) > 1e-6 || std::abs(d.y) > 1e-6 || std::abs(d.z) > 1e-6)
      throw ValidationError("asset sidecar extents do not match the mesh");
  }
  return asset;
}

Asset load_asset(const std::filesystem::path& mesh_file, const std::filesystem::path& sidecar_file) {
  return asset_from_sidecar(read_ply(mesh_file), read_file(sidecar_file));
}

std::string asset_sidecar_json(const Asset& asset) {
  json j{{"asset_id", asset.id()}, {"up", "+z"}, {"frontal", "+y"}, {"extents", vec_to_json(asset.extents())}};
  return j.dump(2) + "\n";
}

void export_asset(const Asset& asset, const std::filesystem::path& dir) {
  write_ply(dir / (asset.id() + ".ply"), asset.mesh());
  write_file(dir / (asset.id() + ".json"), asset_sidecar_json(asset));
}

std::filesystem::path sidecar_path_for(const std::filesystem::path& mesh_file) {
  std::filesystem::path p = mesh_file;
  p.replace_extension(".json");
  return p;
}

}  // namespace placekit
