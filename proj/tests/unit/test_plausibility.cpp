#include <gtest/gtest.h>

#include <algorithm>

#include "placekit/constraints.hpp"
#include "placekit/errors.hpp"
#include "placekit/plausibility.hpp"
#include "placekit/random.hpp"

namespace placekit {
namespace {

const ThresholdConfig kCfg{};

TriangleMesh floor_quad(double size) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {size, 0, 0}, {size, size, 0}, {0, size, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

// Layer heights of one cell, real intersections only.
std::vector<double> layers_at(const HeightmapStack& s, int i, int j) {
  std::vector<double> out;
  for (int k = 0; k < s.count(i, j); ++k) out.push_back(s.at(i, j, k));
  return out;
}

TEST(Heightmap, FlatFloor) {
  const HeightmapStack s = build_heightmap_stack(IndexedMesh(floor_quad(4)), 0.025);
  EXPECT_EQ(s.layers(), 1);
  EXPECT_EQ(s.width(), 160);
  EXPECT_EQ(s.height(), 160);
  for (int j = 0; j < s.height(); j += 7)
    for (int i = 0; i < s.width(); i += 7) {
      EXPECT_EQ(s.at(i, j, 0), 0.0);
      EXPECT_TRUE(s.faces_up(i, j, 0));
      EXPECT_TRUE(s.support_candidate(i, j, 0));
    }
}

TEST(Heightmap, TableTop) {
  TriangleMesh m = floor_quad(4);
  m.append(box_mesh({{2, 2, 0.735}, {0.5, 0.4, 0.015}, 0}));
  const HeightmapStack s = build_heightmap_stack(IndexedMesh(m), 0.025);
  EXPECT_EQ(s.layers(), 3);
  const auto [i, j] = s.cell_of(2.01, 2.01);
  const auto got = layers_at(s, i, j);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0], 0.0);
  EXPECT_NEAR(got[1], 0.72, 1e-12);
  EXPECT_NEAR(got[2], 0.75, 1e-12);
  EXPECT_TRUE(s.faces_up(i, j, 0));
  EXPECT_FALSE(s.faces_up(i, j, 1));
  EXPECT_TRUE(s.faces_up(i, j, 2));
  EXPECT_NEAR(s.ceiling(i, j, 0), 0.72, 1e-12);
  EXPECT_TRUE(s.support_candidate(i, j, 0));
  EXPECT_TRUE(s.support_candidate(i, j, 2));
  EXPECT_FALSE(s.real(i, j, 2) && s.count(i, j) < 3);
  const auto [oi, oj] = s.cell_of(0.5, 0.5);
  EXPECT_EQ(s.count(oi, oj), 1);
  EXPECT_FALSE(s.real(oi, oj, 1));
}

TEST(Heightmap, MatchesPerRayOracle) {
  Rng rng(4);
  for (int scene = 0; scene < 5; ++scene) {
    TriangleMesh m = floor_quad(2);
    for (int k = 0; k < 4; ++k)
      m.append(box_mesh({{rng.uniform(0.3, 1.7), rng.uniform(0.3, 1.7), rng.uniform(0.2, 1.0)},
                         {rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3), rng.uniform(0.02, 0.2)},
                         rng.uniform(0, kPi)}));
    const IndexedMesh mesh(m);
    const HeightmapStack s = build_heightmap_stack(mesh, 0.05, 16);
    for (int j = 0; j < s.height(); ++j) {
      for (int i = 0; i < s.width(); ++i) {
        const Vec2 c = s.cell_center(i, j);
        const Ray ray{{c.x, c.y, 10}, {0, 0, -1}};
        std::vector<double> expected;
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
          const auto [a, b, cc] = m.corners(t);
          if (cross(b - a, cc - a).z == 0.0) continue;
          if (const auto hit = intersect_ray_triangle(ray, a, b, cc)) expected.push_back(10 - *hit);
        }
        std::sort(expected.begin(), expected.end());
        // Shared-edge hits collapse to one per surface.
        expected.erase(std::unique(expected.begin(), expected.end(),
                                   [](double x, double y) { return std::abs(x - y) <= 1e-9; }),
                       expected.end());
        const auto got = layers_at(s, i, j);
        ASSERT_EQ(got.size(), expected.size()) << scene << " " << i << " " << j;
        for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], expected[k], 1e-9);
      }
    }
  }
}

TEST(Heightmap, RejectsBadInput) {
  EXPECT_THROW(build_heightmap_stack(IndexedMesh(floor_quad(1)), 0.0), ValidationError);
}

TEST(Footprint, AxisAlignedBox) {
  const Asset asset = make_box_asset("b", {0.2, 0.4, 0.3});
  const AssetFootprint fp = compute_asset_footprints(asset, 0.025, 0.025);
  ASSERT_EQ(fp.bins.size(), 8u);
  const FootprintBin& b0 = fp.bins[0];
  EXPECT_EQ(b0.nx, 8);
  EXPECT_EQ(b0.ny, 16);
  for (int j = 0; j < b0.ny; ++j)
    for (int i = 0; i < b0.nx; ++i) {
      EXPECT_TRUE(b0.occupied_at(i, j));
      EXPECT_NEAR(b0.top_at(i, j), 0.3, 1e-12);
    }
  const FootprintBin& b2 = fp.bins[2];
  EXPECT_EQ(b2.nx, 16);
  EXPECT_EQ(b2.ny, 8);
  EXPECT_EQ(b2.bbox_x1 - b2.bbox_x0, b0.bbox_y1 - b0.bbox_y0);
  EXPECT_EQ(b2.bbox_y1 - b2.bbox_y0, b0.bbox_x1 - b0.bbox_x0);
}

TEST(Footprint, KernelCoversFootprintPlusMargin) {
  const Asset asset = make_box_asset("b", {0.2, 0.4, 0.3});
  const AssetFootprint fp = compute_asset_footprints(asset, 0.025, 0.025);
  // Cell squares grown by half a cell plus the margin reach 0.05 beyond
  // the box: offsets with |di| * 0.025 < 0.1 + 0.05 on x.
  int max_di = 0, max_dj = 0;
  for (const auto& o : fp.bins[0].kernel) {
    max_di = std::max(max_di, std::abs(o.di));
    max_dj = std::max(max_dj, std::abs(o.dj));
    EXPECT_NEAR(o.height, 0.3, 1e-12);
  }
  EXPECT_EQ(max_di, 5);
  EXPECT_EQ(max_dj, 9);
}

TEST(Footprint, LShapeMatchesColumnOracle) {
  const Asset asset = make_l_asset("l", {0.5, 0.3, 0.6});
  const AssetFootprint fp = compute_asset_footprints(asset, 0.025, 0.0);
  for (int y = 0; y < kRotationBins; ++y) {
    const FootprintBin& bin = fp.bins[y];
    TriangleMesh rotated = asset.mesh();
    for (Vec3& v : rotated.vertices) v = rotate_z(v, bin.yaw);
    for (int j = 0; j < bin.ny; ++j) {
      for (int i = 0; i < bin.nx; ++i) {
        const Ray ray{{bin.min_corner.x + (i + 0.5) * 0.025, bin.min_corner.y + (j + 0.5) * 0.025, 5}, {0, 0, -1}};
        double top = -HUGE_VAL;
        for (std::size_t t = 0; t < rotated.triangles.size(); ++t) {
          const auto [a, b, c] = rotated.corners(t);
          if (const auto hit = intersect_ray_triangle(ray, a, b, c)) top = std::max(top, 5 - *hit);
        }
        ASSERT_EQ(bin.occupied_at(i, j) != 0, top > -HUGE_VAL) << y << " " << i << " " << j;
        if (top > -HUGE_VAL) EXPECT_NEAR(bin.top_at(i, j), top + 0.3, 1e-9);
      }
    }
  }
}

TEST(PhysicalGrid, FlatFloorAllBinsValid) {
  const HeightmapStack s = build_heightmap_stack(IndexedMesh(floor_quad(2)), 0.025);
  const AssetFootprint fp = compute_asset_footprints(make_box_asset("b", {0.2, 0.2, 0.2}), kCfg);
  const PhysicalGrid g = compute_physical_grid(s, fp, kCfg);
  // The kernel reaches 7 cells out from the center on the diagonal bins.
  for (int j = 8; j < s.height() - 8; ++j)
    for (int i = 8; i < s.width() - 8; ++i) ASSERT_EQ(g.bits(i, j, 0), 0xFF) << i << " " << j;
  EXPECT_EQ(g.bits(0, 0, 0), 0);
  EXPECT_EQ(g.support(40, 40, 0), 0.0);
}

int bits_near_step(double step) {
  TriangleMesh m = floor_quad(2);
  m.append(box_mesh({{1.5, 1, step / 2}, {0.5, 1, step / 2}, 0}));  // platform over x > 1
  const HeightmapStack s = build_heightmap_stack(IndexedMesh(m), 0.025);
  const AssetFootprint fp = compute_asset_footprints(make_box_asset("b", {0.2, 0.2, 0.2}), kCfg);
  const PhysicalGrid g = compute_physical_grid(s, fp, kCfg);
  // Centered just left of the step, the footprint straddles it.
  const auto [i, j] = s.cell_of(0.98, 1.0);
  return g.bits(i, j, 0);
}

TEST(PhysicalGrid, StepRangeRule) {
  EXPECT_EQ(bits_near_step(0.12), 0);
  EXPECT_EQ(bits_near_step(0.08), 0xFF);
}

int bits_under_shelf(double clearance) {
  TriangleMesh m = floor_quad(2);
  m.append(box_mesh({{1, 1, clearance + 0.015}, {0.6, 0.6, 0.015}, 0}));
  const HeightmapStack s = build_heightmap_stack(IndexedMesh(m), 0.025);
  const AssetFootprint fp = compute_asset_footprints(make_box_asset("b", {0.2, 0.2, 0.5}), kCfg);
  const PhysicalGrid g = compute_physical_grid(s, fp, kCfg);
  const auto [i, j] = s.cell_of(1.01, 1.01);
  return g.bits(i, j, 0);
}

TEST(PhysicalGrid, ZFitUnderShelf) {
  EXPECT_EQ(bits_under_shelf(0.4), 0);
  EXPECT_EQ(bits_under_shelf(0.6), 0xFF);
}

TEST(PhysicalGrid, AgreesWithMeshOracleUnderShelf) {
  // The grid verdict matches the exact mesh checker at the cell center.
  for (const double clearance : {0.4, 0.6}) {
    TriangleMesh m = floor_quad(2);
    m.append(box_mesh({{1, 1, clearance + 0.015}, {0.6, 0.6, 0.015}, 0}));
    PointCloud pc;
    pc.positions = {{1, 1, 0}};
    pc.colors = {{}};
    const SceneModel scene("s", m, pc, {});
    const Asset asset = make_box_asset("b", {0.2, 0.2, 0.5});
    EXPECT_EQ(check_physical(scene, asset, {{1.0125, 1.0125, 0.25}, 0}, kCfg), bits_under_shelf(clearance) != 0);
  }
}

TEST(PointMask, InheritsCellBits) {
  TriangleMesh m = floor_quad(2);
  m.append(box_mesh({{1, 1, 1.25}, {0.05, 1, 1.25}, 0}));  // wall along x = 1
  const HeightmapStack s = build_heightmap_stack(IndexedMesh(m), 0.025);
  const AssetFootprint fp = compute_asset_footprints(make_box_asset("b", {0.2, 0.2, 0.2}), kCfg);
  const PhysicalGrid g = compute_physical_grid(s, fp, kCfg);
  const auto [i, j] = s.cell_of(0.5, 1.0);
  const Vec2 c = s.cell_center(i, j);
  PointCloud pc;
  pc.positions = {{c.x, c.y, 0.0}, {1.05, 1.0, 1.0}, {1.0, 1.0, 2.5}};
  pc.colors.resize(3);
  const PlacementMask mask = grid_to_point_mask(g, s, pc);
  EXPECT_EQ(mask.bits(0), g.bits(i, j, 0));
  EXPECT_EQ(mask.bits(0), 0xFF);
  EXPECT_FALSE(mask.valid(1));  // wall face
  EXPECT_EQ(mask.bits(1), 0);
  EXPECT_FALSE(mask.valid(2));  // wall top is too narrow
}

TEST(Bins, YawBinRoundTrip) {
  for (int b = 0; b < kRotationBins; ++b) EXPECT_EQ(yaw_bin(bin_yaw(b)), b);
  EXPECT_EQ(yaw_bin(deg_to_rad(22.0)), 0);
  EXPECT_EQ(yaw_bin(deg_to_rad(23.0)), 1);
  EXPECT_EQ(yaw_bin(deg_to_rad(-10.0)), 0);
  EXPECT_EQ(yaw_bin(deg_to_rad(340.0)), 0);
  EXPECT_NEAR(bin_yaw(3), deg_to_rad(135), 1e-12);
}

}  // namespace
}  // namespace placekit
