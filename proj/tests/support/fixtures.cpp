#include "fixtures.hpp"

#include <unistd.h>

namespace placekit::testing {

Obb box_on(double x, double y, const Vec3& size, double bottom, double yaw) {
  return {{x, y, bottom + size.z / 2}, size * 0.5, yaw};
}

SceneModel box_scene(const std::string& id, const std::vector<Item>& items, double size, double density) {
  TriangleMesh mesh = box_mesh({{size / 2, size / 2, -0.05}, {size / 2, size / 2, 0.05}, 0.0});
  std::vector<Anchor> anchors;
  int next_id = 1;
  for (const Item& item : items) {
    mesh.append(box_mesh(item.box));
    anchors.push_back({next_id++, item.label, item.box});
  }
  PointCloud points = sample_point_cloud(mesh, density, 1);
  return SceneModel(id, std::move(mesh), std::move(points), std::move(anchors));
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("placekit_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path data_dir() { return PLACEKIT_TEST_DATA_DIR; }

}  // namespace placekit::testing
