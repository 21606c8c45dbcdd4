#include "placekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "placekit/errors.hpp"
#include "placekit/random.hpp"

namespace placekit {

using nlohmann::json;

namespace {

constexpr double kWallGap = 0.01;      // against-wall items keep this gap to the wall
constexpr double kItemClearance = 0.05;
constexpr double kDoorClearance = 0.9;  // keep-out depth in front of doors
constexpr int kPlacementAttempts = 400;

Rgb rgb8(int r, int g, int b) { return {r / 255.0, g / 255.0, b / 255.0}; }

Rgb color_for(std::string_view label) {
  if (label == "floor") return rgb8(150, 130, 110);
  if (label == "wall") return rgb8(225, 222, 215);
  if (label == "table") return rgb8(140, 90, 50);
  if (label == "desk") return rgb8(170, 120, 70);
  if (label == "chair") return rgb8(60, 80, 140);
  if (label == "bed") return rgb8(200, 200, 230);
  if (label == "sofa") return rgb8(120, 40, 40);
  if (label == "tv") return rgb8(20, 20, 20);
  return rgb8(128, 128, 128);
}

double wall_length(const SynthSceneSpec& s, int wall) { return wall % 2 == 0 ? s.size_x : s.size_y; }

// Axis-aligned box on a wall: `s0..s1` along the wall, full thickness across.
Obb wall_box(const SynthSceneSpec& s, int wall, double s0, double s1, double z0, double z1) {
  const double th = s.wall_thickness;
  Vec3 lo;
  Vec3 hi;
  switch (wall) {
    case 0:
      lo = {s0, -th, z0};
      hi = {s1, 0.0, z1};
      break;
    case 1:
      lo = {s.size_x, s0, z0};
      hi = {s.size_x + th, s1, z1};
      break;
    case 2:
      lo = {s0, s.size_y, z0};
      hi = {s1, s.size_y + th, z1};
      break;
    default:
      lo = {-th, s0, z0};
      hi = {0.0, s1, z1};
      break;
  }
  return Obb{(lo + hi) * 0.5, (hi - lo) * 0.5, 0.0};
}

// Yaw turning an item's +Y front away from the given wall into the room.
double wall_yaw(int wall) { return wall * (kPi / 2); }

Obb opening_box(const SynthSceneSpec& s, const OpeningSpec& o) {
  return wall_box(s, o.wall, o.offset - o.width / 2, o.offset + o.width / 2, o.bottom,
                  o.bottom + o.height);
}

Obb door_keepout(const SynthSceneSpec& s, const OpeningSpec& o) {
  const double s0 = o.offset - o.width / 2 - 0.05;
  const double s1 = o.offset + o.width / 2 + 0.05;
  const double h = o.bottom + o.height;
  Vec3 lo;
  Vec3 hi;
  switch (o.wall) {
    case 0:
      lo = {s0, 0.0, 0.0};
      hi = {s1, kDoorClearance, h};
      break;
    case 1:
      lo = {s.size_x - kDoorClearance, s0, 0.0};
      hi = {s.size_x, s1, h};
      break;
    case 2:
      lo = {s0, s.size_y - kDoorClearance, 0.0};
      hi = {s1, s.size_y, h};
      break;
    default:
      lo = {0.0, s0, 0.0};
      hi = {kDoorClearance, s1, h};
      break;
  }
  return Obb{(lo + hi) * 0.5, (hi - lo) * 0.5, 0.0};
}

TriangleMesh furniture_mesh(const FurnitureSpec& f, const Obb& box) {
  const Rgb color = color_for(f.label);
  if (f.label != "table" && f.label != "desk") return box_mesh(box, color);
  // Table-like: 3 cm top on four 5 cm legs.
  const Vec3& h = box.half_extents;
  const double top = std::min(0.03, box.half_extents.z);
  const double bottom = box.center.z - h.z;
  TriangleMesh mesh = box_mesh(
      Obb{{box.center.x, box.center.y, bottom + 2 * h.z - top / 2}, {h.x, h.y, top / 2}, box.yaw}, color);
  const double leg = 0.025;
  const double leg_h = (2 * h.z - top) / 2;
  if (leg_h <= 0.0) return mesh;
  for (const double sx : {-1.0, 1.0}) {
    for (const double sy : {-1.0, 1.0}) {
      const Vec2 local{sx * (h.x - leg - 0.02), sy * (h.y - leg - 0.02)};
      const Vec2 w = rotate(local, box.yaw);
      mesh.append(box_mesh(Obb{{box.center.x + w.x, box.center.y + w.y, bottom + leg_h}, {leg, leg, leg_h}, box.yaw},
                           color));
    }
  }
  return mesh;
}

struct Layout {
  std::vector<Obb> item_boxes;
};

bool inside_room(const SynthSceneSpec& s, const Obb& box) {
  const Aabb b = box.bounds();
  constexpr double eps = 1e-9;
  return b.min.x >= -eps && b.min.y >= -eps && b.max.x <= s.size_x + eps &&
         b.max.y <= s.size_y + eps && b.max.z <= s.wall_height;
}

Layout compute_layout(const SynthSceneSpec& spec) {
  validate(spec);
  Rng rng(derive_seed(spec.seed, "layout"));
  std::vector<Obb> obstacles;
  for (const OpeningSpec& o : spec.openings) {
    obstacles.push_back(opening_box(spec, o));
    if (o.label == "door") obstacles.push_back(door_keepout(spec, o));
  }
  Layout layout;
  for (std::size_t i = 0; i < spec.furniture.size(); ++i) {
    const FurnitureSpec& f = spec.furniture[i];
    const Vec3 half = f.size * 0.5;
    const double cz = f.elevation + half.z;
    bool placed = false;
    const int attempts = f.policy == PositionPolicy::kFixed ? 1 : kPlacementAttempts;
    for (int attempt = 0; attempt < attempts && !placed; ++attempt) {
      Obb box{{}, half, 0.0};
      if (f.policy == PositionPolicy::kFixed) {
        box.center = {f.position.x, f.position.y, cz};
        box.yaw = wrap_angle(f.yaw);
      } else if (f.policy == PositionPolicy::kAgainstWall) {
        const int wall = f.wall >= 0 ? f.wall : static_cast<int>(rng.below(4));
        const double len = wall_length(spec, wall);
        const double lo = half.x + kWallGap;
        const double hi = len - half.x - kWallGap;
        if (hi < lo) continue;
        const double s = rng.uniform(lo, hi);
        const double across = kWallGap + half.y;
        box.yaw = wall_yaw(wall);
        switch (wall) {
          case 0:
            box.center = {s, across, cz};
            break;
          case 1:
            box.center = {spec.size_x - across, s, cz};
            break;
          case 2:
            box.center = {s, spec.size_y - across, cz};
            break;
          default:
            box.center = {across, s, cz};
            break;
        }
      } else {
        box.yaw = rng.chance(0.6) ? wall_yaw(static_cast<int>(rng.below(4))) : rng.uniform(0.0, kTwoPi);
        const Aabb extent = Obb{{}, half, box.yaw}.bounds();
        const double rx = extent.max.x + kWallGap;
        const double ry = extent.max.y + kWallGap;
        if (spec.size_x - rx < rx || spec.size_y - ry < ry) continue;
        box.center = {rng.uniform(rx, spec.size_x - rx), rng.uniform(ry, spec.size_y - ry), cz};
      }
      if (!inside_room(spec, box)) continue;
      bool clear = true;
      for (const Obb& other : obstacles)
        if (obb_min_distance(box, other) < kItemClearance) {
          clear = false;
          break;
        }
      if (!clear) continue;
      obstacles.push_back(box);
      layout.item_boxes.push_back(box);
      placed = true;
    }
    if (!placed)
      throw GenerationError("cannot place furniture item " + std::to_string(i) + " (" + f.label +
                            ") in scene " + spec.scene_id);
  }
  return layout;
}

void add_wall(const SynthSceneSpec& spec, int wall, TriangleMesh& mesh) {
  const Rgb color = color_for("wall");
  const double th = spec.wall_thickness;
  // Walls 0 and 2 also cover the corners.
  const double start = wall % 2 == 0 ? -th : 0.0;
  const double end = wall_length(spec, wall) + (wall % 2 == 0 ? th : 0.0);
  std::vector<const OpeningSpec*> openings;
  for (const OpeningSpec& o : spec.openings)
    if (o.wall == wall) openings.push_back(&o);
  std::sort(openings.begin(), openings.end(),
            [](const OpeningSpec* a, const OpeningSpec* b) { return a->offset < b->offset; });
  double cursor = start;
  for (const OpeningSpec* o : openings) {
    const double s0 = o->offset - o->width / 2;
    const double s1 = o->offset + o->width / 2;
    if (s0 > cursor) mesh.append(box_mesh(wall_box(spec, wall, cursor, s0, 0.0, spec.wall_height), color));
    if (o->bottom > 0.0) mesh.append(box_mesh(wall_box(spec, wall, s0, s1, 0.0, o->bottom), color));
    const double top = o->bottom + o->height;
    if (top < spec.wall_height)
      mesh.append(box_mesh(wall_box(spec, wall, s0, s1, top, spec.wall_height), color));
    cursor = s1;
  }
  if (end > cursor) mesh.append(box_mesh(wall_box(spec, wall, cursor, end, 0.0, spec.wall_height), color));
}

const char* policy_name(PositionPolicy p) {
  switch (p) {
    case PositionPolicy::kFree:
      return "free";
    case PositionPolicy::kAgainstWall:
      return "against_wall";
    case PositionPolicy::kFixed:
      return "fixed";
  }
  return "free";
}

PositionPolicy policy_from_name(const std::string& name) {
  if (name == "free") return PositionPolicy::kFree;
  if (name == "against_wall") return PositionPolicy::kAgainstWall;
  if (name == "fixed") return PositionPolicy::kFixed;
  throw ValidationError("unknown position policy \"" + name + "\"");
}

}  // namespace

void validate(const SynthSceneSpec& spec) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (spec.scene_id.empty()) throw ValidationError("synthetic scene needs an id");
  if (!positive(spec.size_x) || !positive(spec.size_y) || !positive(spec.wall_height) ||
      !positive(spec.wall_thickness) || !positive(spec.point_density))
    throw ValidationError("room dimensions, wall sizes and point density must be positive");
  for (std::size_t i = 0; i < spec.openings.size(); ++i) {
    const OpeningSpec& o = spec.openings[i];
    const std::string what = "opening " + std::to_string(i);
    if (o.label != "door" && o.label != "window") throw ValidationError(what + " must be a door or a window");
    if (o.wall < 0 || o.wall > 3) throw ValidationError(what + " has an invalid wall index");
    if (!positive(o.width) || !positive(o.height) || !(o.bottom >= 0.0))
      throw ValidationError(what + " has invalid dimensions");
    if (o.offset - o.width / 2 < 0.05 || o.offset + o.width / 2 > wall_length(spec, o.wall) - 0.05)
      throw ValidationError(what + " does not fit on its wall");
    if (o.bottom + o.height > spec.wall_height) throw ValidationError(what + " is taller than the wall");
    for (std::size_t j = 0; j < i; ++j) {
      const OpeningSpec& p = spec.openings[j];
      if (p.wall == o.wall && std::abs(p.offset - o.offset) < (p.width + o.width) / 2 + 0.05)
        throw ValidationError(what + " overlaps opening " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < spec.furniture.size(); ++i) {
    const FurnitureSpec& f = spec.furniture[i];
    const std::string what = "furniture item " + std::to_string(i);
    if (f.label.empty()) throw ValidationError(what + " has no class");
    if (!positive(f.size.x) || !positive(f.size.y) || !positive(f.size.z) || !(f.elevation >= 0.0))
      throw ValidationError(what + " has invalid dimensions");
    if (f.wall < -1 || f.wall > 3) throw ValidationError(what + " has an invalid wall index");
  }
}

SceneModel generate_synthetic_scene(const SynthSceneSpec& spec) {
  const Layout layout = compute_layout(spec);
  const double th = spec.wall_thickness;
  TriangleMesh mesh = box_mesh(Obb{{spec.size_x / 2, spec.size_y / 2, -0.025},
                                   {spec.size_x / 2 + th, spec.size_y / 2 + th, 0.025},
                                   0.0},
                               color_for("floor"));
  for (int wall = 0; wall < 4; ++wall) add_wall(spec, wall, mesh);
  std::vector<Anchor> anchors;
  int next_id = 1;
  for (std::size_t i = 0; i < spec.furniture.size(); ++i) {
    mesh.append(furniture_mesh(spec.furniture[i], layout.item_boxes[i]));
    anchors.push_back(Anchor{next_id++, spec.furniture[i].label, layout.item_boxes[i]});
  }
  for (const OpeningSpec& o : spec.openings) anchors.push_back(Anchor{next_id++, o.label, opening_box(spec, o)});
  PointCloud points = sample_point_cloud(mesh, spec.point_density, derive_seed(spec.seed, "points"));
  return SceneModel(spec.scene_id, std::move(mesh), std::move(points), std::move(anchors));
}

SynthSceneSpec random_room_spec(std::uint64_t seed, const RandomRoomOptions& options) {
  Rng rng(derive_seed(seed, "room"));
  auto round_cm = [](double v) { return std::round(v * 100.0) / 100.0; };
  SynthSceneSpec spec;
  spec.scene_id = "synth_" + std::to_string(seed);
  spec.seed = seed;
  spec.size_x = round_cm(rng.uniform(options.min_size, options.max_size));
  spec.size_y = round_cm(rng.uniform(options.min_size, options.max_size));

  auto try_opening = [&](OpeningSpec o) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      o.wall = static_cast<int>(rng.below(4));
      const double len = wall_length(spec, o.wall);
      o.offset = round_cm(rng.uniform(o.width / 2 + 0.3, len - o.width / 2 - 0.3));
      spec.openings.push_back(o);
      try {
        validate(spec);
        return;
      } catch (const ValidationError&) {
        spec.openings.pop_back();
      }
    }
  };
  try_opening(OpeningSpec{"door", 0, 0.0, 0.9, 0.0, 2.0});
  const auto windows = rng.below(3);
  for (std::uint64_t w = 0; w < windows; ++w)
    try_opening(OpeningSpec{"window", 0, 0.0, round_cm(rng.uniform(0.8, 1.4)), 0.9, 1.0});

  struct Kind {
    const char* label;
    double weight;
  };
  static constexpr Kind kKinds[] = {{"table", 3}, {"chair", 4}, {"desk", 2}, {"bed", 1}, {"sofa", 1}, {"tv", 1}};
  std::vector<double> weights;
  for (const Kind& k : kKinds) weights.push_back(k.weight);
  const int span = std::max(0, options.max_items - options.min_items);
  const int count = options.min_items + static_cast<int>(rng.below(static_cast<std::uint64_t>(span) + 1));
  for (int i = 0; i < count; ++i) {
    const std::string label = kKinds[rng.weighted(weights)].label;
    FurnitureSpec f;
    f.label = label;
    if (label == "table") {
      f.size = {rng.uniform(0.8, 1.6), rng.uniform(0.6, 0.9), rng.uniform(0.72, 0.76)};
    } else if (label == "chair") {
      const double w = rng.uniform(0.42, 0.5);
      f.size = {w, w, rng.uniform(0.8, 0.95)};
    } else if (label == "desk") {
      f.size = {rng.uniform(1.0, 1.4), rng.uniform(0.55, 0.7), rng.uniform(0.72, 0.76)};
      f.policy = PositionPolicy::kAgainstWall;
    } else if (label == "bed") {
      f.size = {rng.uniform(1.4, 1.8), rng.uniform(1.9, 2.1), rng.uniform(0.45, 0.55)};
      f.policy = PositionPolicy::kAgainstWall;
    } else if (label == "sofa") {
      f.size = {rng.uniform(1.6, 2.2), rng.uniform(0.8, 0.95), rng.uniform(0.75, 0.9)};
      f.policy = PositionPolicy::kAgainstWall;
    } else {
      f.size = {rng.uniform(0.9, 1.3), rng.uniform(0.06, 0.1), rng.uniform(0.55, 0.75)};
      f.policy = PositionPolicy::kAgainstWall;
      f.elevation = round_cm(rng.uniform(0.9, 1.2));
    }
    f.size = {round_cm(f.size.x), round_cm(f.size.y), round_cm(f.size.z)};
    spec.furniture.push_back(f);
  }
  // Drop items from the back until the layout succeeds.
  while (!spec.furniture.empty()) {
    try {
      compute_layout(spec);
      break;
    } catch (const GenerationError&) {
      spec.furniture.pop_back();
    }
  }
  return spec;
}

std::string synth_spec_json(const SynthSceneSpec& spec) {
  json j;
  j["scene_id"] = spec.scene_id;
  j["size"] = {spec.size_x, spec.size_y};
  j["wall_height"] = spec.wall_height;
  j["wall_thickness"] = spec.wall_thickness;
  j["point_density"] = spec.point_density;
  j["seed"] = spec.seed;
  j["openings"] = json::array();
  for (const OpeningSpec& o : spec.openings)
    j["openings"].push_back({{"class", o.label},
                             {"wall", o.wall},
                             {"offset", o.offset},
                             {"width", o.width},
                             {"bottom", o.bottom},
                             {"height", o.height}});
  j["furniture"] = json::array();
  for (const FurnitureSpec& f : spec.furniture) {
    json item{{"class", f.label},
              {"size", {f.size.x, f.size.y, f.size.z}},
              {"policy", policy_name(f.policy)},
              {"elevation", f.elevation}};
    if (f.policy == PositionPolicy::kAgainstWall) item["wall"] = f.wall;
    if (f.policy == PositionPolicy::kFixed) {
      item["position"] = {f.position.x, f.position.y};
      item["yaw"] = f.yaw;
    }
    j["furniture"].push_back(item);
  }
  return j.dump(2) + "\n";
}

SynthSceneSpec parse_synth_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scene spec JSON: ") + e.what(), e.byte);
  }
  SynthSceneSpec spec;
  try {
    spec.scene_id = j.value("scene_id", spec.scene_id);
    if (j.contains("size")) {
      spec.size_x = j["size"].at(0).get<double>();
      spec.size_y = j["size"].at(1).get<double>();
    }
    spec.wall_height = j.value("wall_height", spec.wall_height);
    spec.wall_thickness = j.value("wall_thickness", spec.wall_thickness);
    spec.point_density = j.value("point_density", spec.point_density);
    spec.seed = j.value("seed", spec.seed);
    for (const json& o : j.value("openings", json::array())) {
      OpeningSpec op;
      op.label = o.value("class", op.label);
      op.wall = o.value("wall", op.wall);
      op.offset = o.value("offset", op.offset);
      op.width = o.value("width", op.width);
      op.bottom = o.value("bottom", op.label == "window" ? 0.9 : 0.0);
      op.height = o.value("height", op.label == "window" ? 1.0 : 2.0);
      spec.openings.push_back(op);
    }
    for (const json& f : j.value("furniture", json::array())) {
      FurnitureSpec item;
      item.label = f.at("class").get<std::string>();
      const json& size = f.at("size");
      item.size = {size.at(0).get<double>(), size.at(1).get<double>(), size.at(2).get<double>()};
      item.policy = policy_from_name(f.value("policy", std::string("free")));
      item.wall = f.value("wall", -1);
      item.elevation = f.value("elevation", 0.0);
      if (f.contains("position")) item.position = {f["position"].at(0).get<double>(), f["position"].at(1).get<double>(), 0.0};
      item.yaw = f.value("yaw", 0.0);
      spec.furniture.push_back(item);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid scene spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

std::vector<Asset> standard_assets() {
  std::vector<Asset> out;
  out.push_back(make_box_asset("box", {0.3, 0.4, 0.35}));
  out.push_back(make_l_asset("lshape", {0.5, 0.3, 0.6}));
  return out;
}

}  // namespace placekit
