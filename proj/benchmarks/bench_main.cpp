#include <benchmark/benchmark.h>

#include "placekit/masks.hpp"
#include "placekit/random.hpp"
#include "placekit/synth.hpp"
#include "placekit/visibility.hpp"

namespace placekit {
namespace {

const SceneModel& room() {
  static const SceneModel scene = generate_synthetic_scene(random_room_spec(42));
  return scene;
}

void BM_RaycastFirst(benchmark::State& state) {
  const IndexedMesh& mesh = room().mesh();
  const Aabb b = mesh.bounds();
  Rng rng(1);
  std::vector<Ray> rays;
  for (int i = 0; i < 1024; ++i) {
    const Vec3 o{rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y), rng.uniform(0.1, 2.0)};
    rays.push_back(Ray::through(o, {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}));
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(raycast_first(mesh, rays[i++ % rays.size()]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RaycastFirst);

void BM_PhysicalContext(benchmark::State& state) {
  const Asset asset = make_box_asset("box", {0.3, 0.3, 0.3});
  ThresholdConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(build_physical_context(room(), asset, cfg));
}
BENCHMARK(BM_PhysicalContext)->Unit(benchmark::kMillisecond);

void BM_Visibility(benchmark::State& state) {
  const SceneModel& scene = room();
  const Asset asset = make_box_asset("box", {0.3, 0.3, 0.3});
  const Anchor* anchor = scene.largest_of_class("door");
  if (!anchor) {
    state.SkipWithError("room has no door");
    return;
  }
  const AnchorViewpoint view = anchor_viewpoint(scene, *anchor);
  const Aabb b = scene.mesh().bounds();
  const Placement p{{(b.min.x + b.max.x) / 2, (b.min.y + b.max.y) / 2, 0.15}, 0.0};
  ThresholdConfig cfg;
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(asset_visible(scene, asset, p, view, cfg, VisibilityMode::kExact, res));
}
BENCHMARK(BM_Visibility)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace placekit

BENCHMARK_MAIN();
