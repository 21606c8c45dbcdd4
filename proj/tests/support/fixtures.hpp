#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "placekit/geometry.hpp"
#include "placekit/scene.hpp"

namespace placekit::testing {

struct Item {
  std::string label;
  Obb box;
};

// Box resting with its bottom at `bottom`, footprint centered at (x, y).
Obb box_on(double x, double y, const Vec3& size, double bottom = 0.0, double yaw = 0.0);

// Square floor slab [0, size]^2 with its top at z = 0, one closed cuboid
// per item (anchor ids 1, 2, ... in item order) and a point cloud sampled
// at `density`.
SceneModel box_scene(const std::string& id, const std::vector<Item>& items, double size = 4.0,
                     double density = 100.0);

// Fresh, empty directory under the system temp directory.
std::filesystem::path fresh_dir(const std::string& name);

std::filesystem::path data_dir();

}  // namespace placekit::testing
