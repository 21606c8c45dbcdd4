#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "placekit/config.hpp"
#include "placekit/constraints.hpp"
#include "placekit/placement_mask.hpp"
#include "placekit/plausibility.hpp"
#include "placekit/scene.hpp"

namespace placekit {

// Asset center for a bottom contact point: contact + (0, 0, height / 2).
Placement lift_to_center_frame(const Vec3& contact_point, const Asset& asset, double yaw);
// Inverse of lift_to_center_frame.
Vec3 contact_point(const Placement& p, const Asset& asset);

// Physical plausibility data for one (scene, asset) pair. Every prompt on
// the pair reuses it.
struct PhysicalContext {
  HeightmapStack stack;
  AssetFootprint footprint;
  PhysicalGrid grid;
  PlacementMask mask;
};

// Builds the heightmap stack, footprints and grid, then transfers the grid
// to the scene points. A point keeps its cell's bits only when it lies on
// the chosen support height: no lower than the support (the asset would
// sink into it) and at most support_gap_tol above it.
PhysicalContext build_physical_context(const SceneModel& scene, const Asset& asset,
                                       const ThresholdConfig& cfg, int jobs = 1);

PlacementMask physical_point_mask(const PhysicalGrid& grid, const HeightmapStack& stack,
                                  const PointCloud& points, const ThresholdConfig& cfg);

// Mask of one constraint restricted to the physically valid points. Each
// remaining (point, bin) is checked with the asset lifted onto the point at
// the bin-center yaw, so box-level rules prune rotation bins wherever the
// posed box changes with yaw. Visibility uses the fixed-rotation cuboid at
// dataset resolution, so its bits are uniform across bins. Throws
// LookupError when an anchor is missing.
PlacementMask constraint_point_mask(const SceneModel& scene, const Asset& asset, const Constraint& c,
                                    const PlacementMask& physical, const ThresholdConfig& cfg,
                                    int jobs = 1);

// Pointwise AND of validity and rotation bits; points left without a
// rotation bit become invalid. Throws ValidationError for an empty list,
// differing sizes or differing scene / asset ids.
PlacementMask combine_masks(const std::vector<PlacementMask>& masks);

// Intersection of the physical mask with every constraint mask.
PlacementMask prompt_mask(const SceneModel& scene, const Asset& asset,
                          const std::vector<Constraint>& constraints, const PlacementMask& physical,
                          const ThresholdConfig& cfg, int jobs = 1);

// 64-bit FNV-1a of the prompt text, as 16 hex digits.
std::string prompt_hash(std::string_view text);

// Euclidean distance from each valid point to the nearest invalid point
// (+inf when every point is valid); 0 for invalid points.
std::vector<double> distance_to_invalid(const PlacementMask& mask, const PointCloud& points);

}  // namespace placekit
