#include "placekit/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "placekit/errors.hpp"
#include "placekit/polygon.hpp"

namespace placekit {

namespace {

// Lift of the support probe above the asset bottom, so that a surface the
// asset rests on exactly is still in front of the ray origin.
constexpr double kSupportLift = 1e-4;

Polygon footprint_polygon(const Obb& box) {
  const auto fp = box.footprint();
  return {fp.begin(), fp.end()};
}

}  // namespace

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::kPlausible:
      return "plausible";
    case Relation::kNear:
      return "near";
    case Relation::kAdjacent:
      return "adjacent";
    case Relation::kOn:
      return "on";
    case Relation::kAbove:
      return "above";
    case Relation::kBelow:
      return "below";
    case Relation::kBetween:
      return "between";
    case Relation::kFacing:
      return "facing";
    case Relation::kVisible:
      return "is_visible";
    case Relation::kNotVisible:
      return "not_visible";
  }
  return "plausible";
}

Relation relation_from_name(std::string_view name) {
  for (const Relation r : kAllRelations)
    if (relation_name(r) == name) return r;
  throw ValidationError("unknown relationship \"" + std::string(name) + "\"");
}

std::string_view group_name(Group g) {
  switch (g) {
    case Group::kPhysical:
      return "physical";
    case Group::kSpatial:
      return "spatial";
    case Group::kRotational:
      return "rotational";
    case Group::kVisibility:
      return "visibility";
  }
  return "physical";
}

Group group_of(Relation r) {
  switch (r) {
    case Relation::kPlausible:
      return Group::kPhysical;
    case Relation::kFacing:
      return Group::kRotational;
    case Relation::kVisible:
    case Relation::kNotVisible:
      return Group::kVisibility;
    default:
      return Group::kSpatial;
  }
}

int arity(Relation r) {
  if (r == Relation::kPlausible) return 0;
  if (r == Relation::kBetween) return 2;
  return 1;
}

void validate(const Constraint& c) {
  if (static_cast<int>(c.anchors.size()) != arity(c.relation))
    throw ValidationError(std::string(relation_name(c.relation)) + " takes " +
                          std::to_string(arity(c.relation)) + " anchor(s)");
  for (const AnchorRef& a : c.anchors)
    if (a.label.empty() && !a.id) throw ValidationError("anchor reference needs a class or an id");
  if (c.relation == Relation::kBetween && c.anchors[0].id && c.anchors[0].id == c.anchors[1].id)
    throw ValidationError("between needs two distinct anchors");
}

std::string to_string(const Constraint& c) {
  std::string out(relation_name(c.relation));
  if (c.anchors.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < c.anchors.size(); ++i) {
    if (i) out += ", ";
    out += c.anchors[i].label;
    if (c.anchors[i].id) out += "#" + std::to_string(*c.anchors[i].id);
  }
  return out + ")";
}

bool proximity_holds(ProximityKind kind, const Obb& asset, const Obb& anchor, double room_size,
                     const ThresholdConfig& cfg) {
  const double d = obb_min_distance(asset, anchor);
  if (kind == ProximityKind::kAdjacent) return d <= cfg.adjacent_tol;
  return d <= cfg.near_room_fraction * room_size;
}

bool vertical_holds(VerticalKind kind, const Obb& asset, const Obb& anchor, const ThresholdConfig& cfg) {
  if (footprint_iom(asset, anchor) < cfg.vertical_iom_min) return false;
  const Interval a = asset.z_span();
  const Interval b = anchor.z_span();
  switch (kind) {
    case VerticalKind::kOn:
      return std::abs(a.lo - b.hi) <= cfg.on_gap_tol;
    case VerticalKind::kAbove: {
      const double gap = a.lo - b.hi;
      // The shared boundary belongs to "on".
      return gap >= cfg.above_below_min_gap && gap > cfg.on_gap_tol;
    }
    case VerticalKind::kBelow:
      return b.lo - a.hi >= cfg.above_below_min_gap;
  }
  return false;
}

bool between_pair_ok(const Obb& a, const Obb& b, const ThresholdConfig& cfg) {
  return obb_min_distance(a, b) <= cfg.between_anchor_max_dist;
}

bool between_holds(const Obb& asset, const Obb& a, const Obb& b, const ThresholdConfig& cfg) {
  if (!between_pair_ok(a, b, cfg)) return false;
  if (footprint_iom(asset, a) > cfg.between_overlap_max || footprint_iom(asset, b) > cfg.between_overlap_max)
    return false;
  const Interval band{std::min(a.z_span().lo, b.z_span().lo), std::max(a.z_span().hi, b.z_span().hi)};
  if (interval_iom(asset.z_span(), band) < cfg.between_iom_min) return false;
  if (cfg.between_mode == BetweenMode::kLine) {
    const Vec2 p{asset.center.x, asset.center.y};
    return point_segment_distance(p, {a.center.x, a.center.y}, {b.center.x, b.center.y}) <=
           cfg.between_line_tol;
  }
  std::vector<Vec2> corners;
  for (const Vec2& v : a.footprint()) corners.push_back(v);
  for (const Vec2& v : b.footprint()) corners.push_back(v);
  const Polygon hull = convex_hull(std::move(corners));
  return convex_iom(footprint_polygon(asset), hull) >= cfg.between_iom_min;
}

bool facing_holds(const Obb& asset, const Obb& anchor, const ThresholdConfig& cfg) {
  const Vec2 front = asset.axis_y();
  const Vec2 lateral = asset.axis_x();
  const Vec2 d{anchor.center.x - asset.center.x, anchor.center.y - asset.center.y};
  const double dist = norm(d);
  if (dist > cfg.facing_max_dist || dist <= 0.0) return false;
  const double cos_angle = std::clamp(dot(front, d) / dist, -1.0, 1.0);
  if (std::acos(cos_angle) > deg_to_rad(cfg.facing_half_angle)) return false;
  const double c = dot(lateral, Vec2{asset.center.x, asset.center.y});
  const Interval asset_span{c - asset.half_extents.x, c + asset.half_extents.x};
  Interval anchor_span{HUGE_VAL, -HUGE_VAL};
  for (const Vec2& v : anchor.footprint()) {
    const double s = dot(lateral, v);
    anchor_span.lo = std::min(anchor_span.lo, s);
    anchor_span.hi = std::max(anchor_span.hi, s);
  }
  return interval_iom(asset_span, anchor_span) >= cfg.facing_lateral_iom_min;
}

std::optional<double> support_gap(const SceneModel& scene, const Asset& asset, const Placement& p,
                                  const ThresholdConfig& cfg) {
  const double bottom = p.t.z - asset.height() / 2;
  const Ray ray{{p.t.x, p.t.y, bottom + kSupportLift}, {0.0, 0.0, -1.0}};
  const double reach = kSupportLift + cfg.support_gap_tol + 1e-9;
  std::optional<double> best;
  const IndexedMesh& mesh = scene.mesh();
  mesh.visit_ray(ray, reach, [&](std::uint32_t tri) {
    if (!(mesh.normal(tri).z > 0.0)) return;
    const auto [a, b, c] = mesh.mesh().corners(tri);
    const auto t = intersect_ray_triangle(ray, a, b, c);
    if (!t || *t < 0.0 || *t > reach) return;
    if (!best || *t < *best) best = *t;
  });
  if (!best) return std::nullopt;
  return *best - kSupportLift;
}

bool check_physical(const SceneModel& scene, const Asset& asset, const Placement& p,
                    const ThresholdConfig& cfg) {
  const auto gap = support_gap(scene, asset, p, cfg);
  if (!gap || *gap > cfg.support_gap_tol) return false;
  // Inside a closed solid the nearest surface above faces up.
  const auto above = raycast_first(scene.mesh(), Ray{p.t, {0.0, 0.0, 1.0}});
  if (above && scene.mesh().normal(above->triangle).z > 0.0) return false;
  return !meshes_penetrate(pose_asset(asset, p).mesh, scene.mesh());
}

bool check_proximity(ProximityKind kind, const SceneModel& scene, const Asset& asset,
                     const Placement& p, int anchor_id, const ThresholdConfig& cfg) {
  return proximity_holds(kind, posed_box(asset, p), scene.anchor(anchor_id).box, scene.room_size(), cfg);
}

bool check_vertical(VerticalKind kind, const SceneModel& scene, const Asset& asset,
                    const Placement& p, int anchor_id, const ThresholdConfig& cfg) {
  return vertical_holds(kind, posed_box(asset, p), scene.anchor(anchor_id).box, cfg);
}

bool check_between(const SceneModel& scene, const Asset& asset, const Placement& p, int anchor1,
                   int anchor2, const ThresholdConfig& cfg) {
  if (anchor1 == anchor2) throw ValidationError("between needs two distinct anchors");
  return between_holds(posed_box(asset, p), scene.anchor(anchor1).box, scene.anchor(anchor2).box, cfg);
}

bool check_facing(const SceneModel& scene, const Asset& asset, const Placement& p, int anchor_id,
                  const ThresholdConfig& cfg) {
  return facing_holds(posed_box(asset, p), scene.anchor(anchor_id).box, cfg);
}

bool check_visibility(VisibilityKind kind, const SceneModel& scene, const Asset& asset,
                      const Placement& p, int anchor_id, const ThresholdConfig& cfg, VisibilityMode mode) {
  const bool visible = asset_visible(scene, asset, p, scene.anchor(anchor_id), cfg, mode);
  return kind == VisibilityKind::kVisible ? visible : !visible;
}

std::vector<const Anchor*> resolve_anchor(const SceneModel& scene, const AnchorRef& ref) {
  if (ref.id) {
    const Anchor& a = scene.anchor(*ref.id);
    if (!ref.label.empty() && a.label != ref.label)
      throw LookupError("anchor " + std::to_string(*ref.id) + " is a " + a.label + ", not a " + ref.label);
    return {&a};
  }
  auto found = scene.anchors_of_class(ref.label);
  if (found.empty()) throw LookupError("scene " + scene.id() + " has no \"" + ref.label + "\" anchor");
  std::sort(found.begin(), found.end(), [](const Anchor* a, const Anchor* b) { return a->id < b->id; });
  return found;
}

const Anchor& visibility_anchor(const SceneModel& scene, const AnchorRef& ref) {
  if (ref.id) return *resolve_anchor(scene, ref).front();
  const Anchor* a = scene.largest_of_class(ref.label);
  if (!a) throw LookupError("scene " + scene.id() + " has no \"" + ref.label + "\" anchor");
  return *a;
}

bool check_constraint(const SceneModel& scene, const Asset& asset, const Placement& p,
                      const Constraint& c, const ThresholdConfig& cfg, VisibilityMode mode) {
  validate(c);
  const Obb box = posed_box(asset, p);
  auto any_instance = [&](auto&& rule) {
    for (const Anchor* a : resolve_anchor(scene, c.anchors[0]))
      if (rule(a->box)) return true;
    return false;
  };
  switch (c.relation) {
    case Relation::kPlausible:
      return check_physical(scene, asset, p, cfg);
    case Relation::kNear:
    case Relation::kAdjacent: {
      const auto kind = c.relation == Relation::kNear ? ProximityKind::kNear : ProximityKind::kAdjacent;
      const double room = scene.room_size();
      return any_instance([&](const Obb& a) { return proximity_holds(kind, box, a, room, cfg); });
    }
    case Relation::kOn:
    case Relation::kAbove:
    case Relation::kBelow: {
      const auto kind = c.relation == Relation::kOn      ? VerticalKind::kOn
                        : c.relation == Relation::kAbove ? VerticalKind::kAbove
                                                         : VerticalKind::kBelow;
      return any_instance([&](const Obb& a) { return vertical_holds(kind, box, a, cfg); });
    }
    case Relation::kFacing:
      return any_instance([&](const Obb& a) { return facing_holds(box, a, cfg); });
    case Relation::kBetween: {
      const auto first = resolve_anchor(scene, c.anchors[0]);
      const auto second = resolve_anchor(scene, c.anchors[1]);
      for (const Anchor* a : first)
        for (const Anchor* b : second)
          if (a->id != b->id && between_holds(box, a->box, b->box, cfg)) return true;
      return false;
    }
    case Relation::kVisible:
    case Relation::kNotVisible: {
      const bool visible = asset_visible(scene, asset, p, visibility_anchor(scene, c.anchors[0]), cfg, mode);
      return c.relation == Relation::kVisible ? visible : !visible;
    }
  }
  return false;
}

ValidityReport evaluate_prompt(const SceneModel& scene, const Asset& asset, const Placement& p,
                               const std::vector<Constraint>& constraints, const ThresholdConfig& cfg,
                               VisibilityMode mode) {
  ValidityReport report;
  report.physical = check_physical(scene, asset, p, cfg);
  report.verdicts.push_back({Constraint::plausible(), report.physical, {}});
  for (const Constraint& c : constraints) {
    if (c.relation == Relation::kPlausible) continue;
    ConstraintVerdict v{c, false, {}};
    try {
      v.satisfied = check_constraint(scene, asset, p, c, cfg, mode);
    } catch (const ValidationError& e) {
      v.error = e.what();
    }
    switch (group_of(c.relation)) {
      case Group::kSpatial:
        report.spatial = report.spatial && v.satisfied;
        break;
      case Group::kRotational:
        report.rotational = report.rotational && v.satisfied;
        break;
      case Group::kVisibility:
        report.visibility = report.visibility && v.satisfied;
        break;
      case Group::kPhysical:
        break;
    }
    report.verdicts.push_back(std::move(v));
  }
  report.language_ok = report.spatial && report.rotational && report.visibility;
  report.complete_ok = report.language_ok && report.physical;
  return report;
}

std::string report_json(const ValidityReport& report) {
  using nlohmann::json;
  json j;
  j["physical"] = report.physical;
  j["spatial"] = report.spatial;
  j["rotational"] = report.rotational;
  j["visibility"] = report.visibility;
  j["language_ok"] = report.language_ok;
  j["complete_ok"] = report.complete_ok;
  j["constraints"] = json::array();
  for (const ConstraintVerdict& v : report.verdicts) {
    json anchors = json::array();
    for (const AnchorRef& a : v.constraint.anchors) {
      json r{{"class", a.label}};
      if (a.id) r["id"] = *a.id;
      anchors.push_back(r);
    }
    json entry{{"relation", relation_name(v.constraint.relation)},
               {"group", group_name(group_of(v.constraint.relation))},
               {"anchors", anchors},
               {"satisfied", v.satisfied}};
    if (!v.error.empty()) entry["error"] = v.error;
    j["constraints"].push_back(entry);
  }
  return j.dump(2) + "\n";
}

}  // namespace placekit
