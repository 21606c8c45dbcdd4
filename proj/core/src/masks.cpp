#include "placekit/masks.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "placekit/errors.hpp"
#include "placekit/parallel.hpp"
#include "placekit/visibility.hpp"

namespace placekit {

Placement lift_to_center_frame(const Vec3& contact_point, const Asset& asset, double yaw) {
  return {contact_point + Vec3{0.0, 0.0, asset.height() / 2}, yaw};
}

Vec3 contact_point(const Placement& p, const Asset& asset) {
  return p.t - Vec3{0.0, 0.0, asset.height() / 2};
}

PhysicalContext build_physical_context(const SceneModel& scene, const Asset& asset,
                                       const ThresholdConfig& cfg, int jobs) {
  validate(cfg);
  PhysicalContext ctx;
  ctx.stack = build_heightmap_stack(scene.mesh(), cfg.cell_size, cfg.max_layers, jobs);
  ctx.footprint = compute_asset_footprints(asset, cfg);
  ctx.grid = compute_physical_grid(ctx.stack, ctx.footprint, cfg, jobs);
  ctx.mask = physical_point_mask(ctx.grid, ctx.stack, scene.points(), cfg);
  ctx.mask.scene_id = scene.id();
  ctx.mask.asset_id = asset.id();
  return ctx;
}

PlacementMask physical_point_mask(const PhysicalGrid& grid, const HeightmapStack& stack,
                                  const PointCloud& points, const ThresholdConfig& cfg) {
  if (points.positions.empty()) throw ValidationError("point cloud is empty");
  PlacementMask mask = PlacementMask::empty(points.size());
  const double tol = 2.0 * stack.cell_size();
  for (std::size_t n = 0; n < points.size(); ++n) {
    const Vec3& p = points.positions[n];
    const auto [i, j] = stack.cell_of(p.x, p.y);
    if (!stack.contains_cell(i, j)) continue;
    int best = -1;
    double best_d = HUGE_VAL;
    for (int l = 0; l < stack.count(i, j); ++l) {
      const double d = std::abs(stack.at(i, j, l) - p.z);
      if (d <= tol && d < best_d) {
        best = l;
        best_d = d;
      }
    }
    if (best < 0) continue;
    const std::uint8_t bits = grid.bits(i, j, best);
    if (!bits) continue;
    const double s = grid.support(i, j, best);
    if (p.z < s - kContactTol || p.z > s + cfg.support_gap_tol) continue;
    mask.set(n, bits);
  }
  return mask;
}

namespace {

VerticalKind vertical_kind(Relation r) {
  return r == Relation::kOn ? VerticalKind::kOn : r == Relation::kAbove ? VerticalKind::kAbove : VerticalKind::kBelow;
}

}  // namespace

PlacementMask constraint_point_mask(const SceneModel& scene, const Asset& asset, const Constraint& c,
                                    const PlacementMask& physical, const ThresholdConfig& cfg, int jobs) {
  validate(c);
  validate(physical);
  const PointCloud& points = scene.points();
  if (physical.size() != points.size())
    throw ValidationError("physical mask size " + std::to_string(physical.size()) +
                          " does not match the scene's " + std::to_string(points.size()) + " points");
  if (c.relation == Relation::kPlausible) return physical;

  PlacementMask out = PlacementMask::empty(physical.size());
  out.scene_id = physical.scene_id;
  out.asset_id = physical.asset_id;

  std::vector<std::size_t> todo;
  for (std::size_t n = 0; n < physical.size(); ++n)
    if (physical.valid(n)) todo.push_back(n);

  if (group_of(c.relation) == Group::kVisibility) {
    const Anchor& anchor = visibility_anchor(scene, c.anchors[0]);
    const AnchorViewpoint view = anchor_viewpoint(scene, anchor);
    const bool want = c.relation == Relation::kVisible;
    parallel_for(todo.size(), jobs, [&](std::size_t k) {
      const std::size_t n = todo[k];
      const Placement p = lift_to_center_frame(points.positions[n], asset, bin_yaw(0));
      if (asset_visible(scene, asset, p, view, cfg, VisibilityMode::kApprox) == want)
        out.set(n, physical.bits(n));
    });
    return out;
  }

  std::vector<Obb> anchors;
  std::vector<std::pair<Obb, Obb>> pairs;
  if (c.relation == Relation::kBetween) {
    const auto first = resolve_anchor(scene, c.anchors[0]);
    const auto second = resolve_anchor(scene, c.anchors[1]);
    for (const Anchor* a : first)
      for (const Anchor* b : second)
        if (a->id != b->id && between_pair_ok(a->box, b->box, cfg)) pairs.emplace_back(a->box, b->box);
  } else {
    for (const Anchor* a : resolve_anchor(scene, c.anchors[0])) anchors.push_back(a->box);
  }
  const double room = scene.room_size();

  auto holds = [&](const Obb& box) {
    switch (c.relation) {
      case Relation::kNear:
      case Relation::kAdjacent: {
        const auto kind = c.relation == Relation::kNear ? ProximityKind::kNear : ProximityKind::kAdjacent;
        for (const Obb& a : anchors)
          if (proximity_holds(kind, box, a, room, cfg)) return true;
        return false;
      }
      case Relation::kOn:
      case Relation::kAbove:
      case Relation::kBelow:
        for (const Obb& a : anchors)
          if (vertical_holds(vertical_kind(c.relation), box, a, cfg)) return true;
        return false;
      case Relation::kFacing:
        for (const Obb& a : anchors)
          if (facing_holds(box, a, cfg)) return true;
        return false;
      case Relation::kBetween:
        for (const auto& [a, b] : pairs)
          if (between_holds(box, a, b, cfg)) return true;
        return false;
      default:
        return false;
    }
  };

  parallel_for(todo.size(), jobs, [&](std::size_t k) {
    const std::size_t n = todo[k];
    const std::uint8_t in = physical.bits(n);
    std::uint8_t bits = 0;
    for (int y = 0; y < kRotationBins; ++y) {
      if (!((in >> y) & 1)) continue;
      if (holds(posed_box(asset, lift_to_center_frame(points.positions[n], asset, bin_yaw(y)))))
        bits |= static_cast<std::uint8_t>(1u << y);
    }
    out.set(n, bits);
  });
  return out;
}

PlacementMask combine_masks(const std::vector<PlacementMask>& masks) {
  if (masks.empty()) throw ValidationError("combine_masks needs at least one mask");
  for (const PlacementMask& m : masks) validate(m);
  PlacementMask out = masks.front();
  for (std::size_t k = 1; k < masks.size(); ++k) {
    const PlacementMask& m = masks[k];
    if (m.size() != out.size())
      throw ValidationError("cannot combine masks of " + std::to_string(out.size()) + " and " +
                            std::to_string(m.size()) + " points");
    auto merge_id = [](std::string& into, const std::string& other, const char* what) {
      if (into.empty()) into = other;
      else if (!other.empty() && other != into)
        throw ValidationError(std::string("cannot combine masks of different ") + what + "s: " + into +
                              " and " + other);
    };
    merge_id(out.scene_id, m.scene_id, "scene");
    merge_id(out.asset_id, m.asset_id, "asset");
    for (std::size_t n = 0; n < out.size(); ++n)
      out.set(n, out.valid(n) && m.valid(n) ? static_cast<std::uint8_t>(out.bits(n) & m.bits(n)) : 0);
  }
  for (std::size_t n = 0; n < out.size(); ++n) out.set(n, out.valid(n) ? out.bits(n) : 0);
  return out;
}

PlacementMask prompt_mask(const SceneModel& scene, const Asset& asset,
                          const std::vector<Constraint>& constraints, const PlacementMask& physical,
                          const ThresholdConfig& cfg, int jobs) {
  std::vector<PlacementMask> masks{physical};
  for (const Constraint& c : constraints) {
    if (c.relation == Relation::kPlausible) continue;
    // Later constraints only need the points that are still valid.
    masks.push_back(constraint_point_mask(scene, asset, c, combine_masks(masks), cfg, jobs));
  }
  return combine_masks(masks);
}

std::string prompt_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> distance_to_invalid(const PlacementMask& mask, const PointCloud& points) {
  if (mask.size() != points.size()) throw ValidationError("mask and point cloud sizes differ");
  std::vector<Vec3> invalid;
  for (std::size_t n = 0; n < mask.size(); ++n)
    if (!mask.valid(n)) invalid.push_back(points.positions[n]);
  std::vector<double> out(mask.size(), 0.0);
  for (std::size_t n = 0; n < mask.size(); ++n) {
    if (!mask.valid(n)) continue;
    double best = std::numeric_limits<double>::infinity();
    const Vec3& p = points.positions[n];
    for (const Vec3& q : invalid) {
      const Vec3 d = p - q;
      best = std::min(best, dot(d, d));
    }
    out[n] = std::sqrt(best);
  }
  return out;
}

}  // namespace placekit
