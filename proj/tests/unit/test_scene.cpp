#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "placekit/errors.hpp"
#include "placekit/ply.hpp"
#include "placekit/random.hpp"
#include "placekit/scene.hpp"
#include "placekit/synth.hpp"

namespace placekit {
namespace {

TriangleMesh floor_mesh() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {2, 0, 0}, {2, 2, 0}, {0, 2, 0}, {1, 1, 0}};
  m.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return m;
}

TEST(Ingest, FloorWithOneTable) {
  const std::string anno = R"({"scene_id": "s", "anchors": [
      {"id": 4, "class": "table", "center": [1, 1, 0.4], "half_extents": [0.5, 0.3, 0.4]}]})";
  const SceneModel scene = ingest_scene(floor_mesh(), anno);
  ASSERT_EQ(scene.anchors().size(), 1u);
  EXPECT_EQ(scene.anchor(4).label, "table");
  EXPECT_EQ(scene.vocabulary(), std::vector<std::string>{"table"});
  EXPECT_EQ(scene.points().size(), 200u);  // 4 m^2 at the default 50 / m^2
  EXPECT_THROW(scene.anchor(5), LookupError);
}

TEST(Ingest, ZeroHalfExtentRejected) {
  const std::string anno = R"({"scene_id": "s", "anchors": [
      {"id": 1, "class": "table", "center": [1, 1, 0.4], "half_extents": [0.5, 0, 0.4]}]})";
  EXPECT_THROW(ingest_scene(floor_mesh(), anno), ValidationError);
}

TEST(Ingest, MalformedJsonIsParseError) {
  EXPECT_THROW(ingest_scene(floor_mesh(), "{\"scene_id\": "), ParseError);
}

TEST(Ingest, ExportRoundtrip) {
  SynthSceneSpec spec;
  spec.scene_id = "rt";
  spec.size_x = 5;
  spec.size_y = 4;
  spec.openings.push_back({});
  for (const char* label : {"table", "chair", "sofa", "bed", "shelf", "desk"}) {
    FurnitureSpec f;
    f.label = label;
    f.size = {0.6, 0.5, 0.7};
    spec.furniture.push_back(f);
  }
  spec.seed = 4;
  const SceneModel scene = generate_synthetic_scene(spec);
  const auto dir = testing::fresh_dir("scene_roundtrip");
  export_scene(scene, dir);
  const SceneModel back = ingest_scene(dir / "rt.ply", dir / "rt.json");
  EXPECT_EQ(back.id(), scene.id());
  EXPECT_EQ(back.anchors(), scene.anchors());
  EXPECT_EQ(back.points(), scene.points());
  EXPECT_EQ(back.mesh().mesh().vertices, scene.mesh().mesh().vertices);
  EXPECT_EQ(back.mesh().mesh().triangles, scene.mesh().mesh().triangles);
  EXPECT_EQ(std::count_if(scene.anchors().begin(), scene.anchors().end(),
                          [](const Anchor& a) { return a.label != "door"; }),
            6);
}

TEST(Pose, IdentityPose) {
  const Asset asset = make_box_asset("a", {0.2, 0.4, 0.3});
  const PosedAsset posed = pose_asset(asset, {});
  EXPECT_EQ(posed.mesh.vertices, asset.mesh().vertices);
  EXPECT_EQ(posed.box.center, Vec3{});
}

TEST(Pose, QuarterTurnSwapsAxes) {
  const Asset asset = make_box_asset("a", {0.2, 0.4, 0.3});
  const Aabb b = pose_asset(asset, {{0, 0, 0}, kPi / 2}).mesh.bounds();
  EXPECT_NEAR(b.size().x, 0.4, 1e-12);
  EXPECT_NEAR(b.size().y, 0.2, 1e-12);
  EXPECT_NEAR(b.size().z, 0.3, 1e-12);
}

TEST(Pose, RandomPosesKeepHeight) {
  const Asset asset = make_l_asset("l", {0.5, 0.3, 0.6});
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const Placement p{{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 2)}, rng.uniform(0, kTwoPi)};
    const Aabb b = pose_asset(asset, p).mesh.bounds();
    EXPECT_NEAR(b.max.z - b.min.z, asset.extents().z, 1e-12);
  }
}

TEST(Asset, MustBeCentered) {
  EXPECT_THROW(Asset("a", box_mesh({{0.1, 0, 0}, {0.5, 0.5, 0.5}, 0})), ValidationError);
  const Asset moved = Asset::from_mesh("a", box_mesh({{3, 2, 1}, {0.5, 0.25, 0.5}, 0}));
  EXPECT_NEAR(moved.extents().x, 1.0, 1e-12);
  EXPECT_NEAR(moved.mesh().bounds().center().x, 0.0, 1e-12);
}

TEST(Asset, SidecarReorientsAxes) {
  // Mesh authored Y-up with its front along +X.
  const TriangleMesh mesh = box_mesh({{0, 0, 0}, {0.3, 0.1, 0.2}, 0});
  const Asset asset = asset_from_sidecar(mesh, R"({"asset_id": "chair", "up": "+y", "frontal": "+x"})");
  EXPECT_EQ(asset.id(), "chair");
  EXPECT_NEAR(asset.extents().z, 0.2, 1e-12);
  EXPECT_NEAR(asset.extents().y, 0.6, 1e-12);
  EXPECT_NEAR(asset.extents().x, 0.4, 1e-12);
  EXPECT_THROW(asset_from_sidecar(mesh, R"({"asset_id": "c", "up": "+y", "frontal": "-y"})"), ValidationError);
}

TEST(Asset, ExportRoundtrip) {
  const Asset asset = make_l_asset("l", {0.5, 0.3, 0.6});
  const auto dir = testing::fresh_dir("asset_roundtrip");
  export_asset(asset, dir);
  const Asset back = load_asset(dir / "l.ply", sidecar_path_for(dir / "l.ply"));
  EXPECT_EQ(back.id(), "l");
  EXPECT_EQ(back.mesh().vertices, asset.mesh().vertices);
  EXPECT_EQ(back.extents(), asset.extents());
}

TEST(PointSampling, UnitFloor) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  const PointCloud pc = sample_point_cloud(m, 100, 3);
  ASSERT_EQ(pc.size(), 100u);
  for (const Vec3& p : pc.positions) EXPECT_EQ(p.z, 0.0);
  EXPECT_THROW(sample_point_cloud(m, 0.0, 3), ValidationError);
}

TEST(PointSampling, CountsFollowArea) {
  // Two triangles with areas 0.5 and 4.5: the small one gets 10% of the
  // points. Binomial 99% bounds on 10000 draws: 1000 +- 2.576 * 30.
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}, {5, 0, 0}, {2, 3, 0}};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  const PointCloud pc = sample_point_cloud(m, 2000, 9);
  ASSERT_EQ(pc.size(), 10000u);
  int small = 0;
  for (const Vec3& p : pc.positions) small += p.x + p.y <= 1.0 + 1e-12 && p.x <= 1.0 + 1e-12;
  EXPECT_NEAR(small, 1000, 2.576 * 30);
}

TEST(Scene, LargestOfClassAndRoomSize) {
  using testing::Item;
  const SceneModel scene = testing::box_scene(
      "s", {Item{"tv", testing::box_on(1, 1, {0.5, 0.1, 0.3})}, Item{"tv", testing::box_on(3, 1, {0.9, 0.1, 0.5})}},
      6.0);
  EXPECT_EQ(scene.largest_of_class("tv")->id, 2);
  EXPECT_EQ(scene.largest_of_class("bed"), nullptr);
  EXPECT_EQ(scene.anchors_of_class("tv").size(), 2u);
  EXPECT_NEAR(scene.room_size(), 6.0, 1e-12);
}

}  // namespace
}  // namespace placekit
