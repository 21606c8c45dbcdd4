#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "placekit/scene.hpp"

namespace placekit {

// Walls are numbered counter-clockwise: 0 at y = 0, 1 at x = X, 2 at y = Y,
// 3 at x = 0. The room interior is [0, X] x [0, Y] with the floor at z = 0.
struct OpeningSpec {
  std::string label = "door";  // "door" or "window"
  int wall = 0;
  double offset = 1.0;  // opening center, meters along the wall's interior span
  double width = 0.9;
  double bottom = 0.0;
  double height = 2.0;
};

enum class PositionPolicy { kFree, kAgainstWall, kFixed };

struct FurnitureSpec {
  std::string label;
  Vec3 size{1.0, 0.6, 0.75};  // width, depth (along the item's +Y front), height
  PositionPolicy policy = PositionPolicy::kFree;
  int wall = -1;              // against-wall: -1 picks a random wall
  double elevation = 0.0;     // bottom height above the floor
  Vec3 position;              // fixed: footprint center (z ignored)
  double yaw = 0.0;           // fixed only
};

struct SynthSceneSpec {
  std::string scene_id = "synth";
  double size_x = 4.0;
  double size_y = 4.0;
  double wall_height = 2.5;
  double wall_thickness = 0.1;
  std::vector<OpeningSpec> openings;
  std::vector<FurnitureSpec> furniture;
  double point_density = 50.0;  // points / m^2
  std::uint64_t seed = 0;
};

struct RandomRoomOptions {
  double min_size = 4.0;
  double max_size = 8.0;
  int min_items = 2;
  int max_items = 8;
};

// Throws ValidationError for malformed specs (non-positive sizes,
// openings outside their wall or overlapping each other).
void validate(const SynthSceneSpec& spec);

// Floor slab, walls split around openings and one cuboid assembly per
// furniture item. Anchors carry exact boxes; openings become "door" and
// "window" anchors. Throws GenerationError when an item cannot be placed
// without overlapping earlier items, door clearances or the walls.
SceneModel generate_synthetic_scene(const SynthSceneSpec& spec);

// Random but valid spec; deterministic per seed.
SynthSceneSpec random_room_spec(std::uint64_t seed, const RandomRoomOptions& options = {});

// Small synthetic asset set used when no assets are given: a box and an
// L-shaped prism whose tall part is at the back.
std::vector<Asset> standard_assets();

std::string synth_spec_json(const SynthSceneSpec& spec);
SynthSceneSpec parse_synth_spec(std::string_view json_text);

}  // namespace placekit
