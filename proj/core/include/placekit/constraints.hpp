#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "placekit/config.hpp"
#include "placekit/scene.hpp"
#include "placekit/visibility.hpp"

namespace placekit {

enum class Relation {
  kPlausible,
  kNear,
  kAdjacent,
  kOn,
  kAbove,
  kBelow,
  kBetween,
  kFacing,
  kVisible,
  kNotVisible,
};

inline constexpr Relation kAllRelations[] = {
    Relation::kPlausible, Relation::kAdjacent, Relation::kBetween, Relation::kFacing,
    Relation::kNear,      Relation::kOn,       Relation::kAbove,   Relation::kBelow,
    Relation::kVisible,   Relation::kNotVisible};

enum class Group { kPhysical, kSpatial, kRotational, kVisibility };

// Template-file names: "plausible", "adjacent", ..., "is_visible", "not_visible".
std::string_view relation_name(Relation r);
// Throws ValidationError for unknown names.
Relation relation_from_name(std::string_view name);
std::string_view group_name(Group g);
Group group_of(Relation r);
// Number of anchors the relation takes (0, 1 or 2).
int arity(Relation r);

// A constraint names its anchors by class; `id` pins a specific instance.
// Without an id any instance of the class may satisfy the constraint,
// except for visibility, which uses the largest instance.
struct AnchorRef {
  std::string label;
  std::optional<int> id;
  friend bool operator==(const AnchorRef&, const AnchorRef&) = default;
  friend auto operator<=>(const AnchorRef&, const AnchorRef&) = default;
};

struct Constraint {
  Relation relation = Relation::kPlausible;
  std::vector<AnchorRef> anchors;

  static Constraint plausible() { return {}; }
  static Constraint unary(Relation r, AnchorRef a) { return {r, {std::move(a)}}; }
  static Constraint between(AnchorRef a, AnchorRef b) {
    return {Relation::kBetween, {std::move(a), std::move(b)}};
  }
  friend bool operator==(const Constraint&, const Constraint&) = default;
  friend auto operator<=>(const Constraint&, const Constraint&) = default;
};

// Throws ValidationError when the anchor count does not match the relation
// or a between constraint names the same instance twice.
void validate(const Constraint& c);
std::string to_string(const Constraint& c);

// ---------------------------------------------------------------------------
// Box-level rules. Boxes are the posed asset and anchor boxes.

enum class ProximityKind { kNear, kAdjacent };
enum class VerticalKind { kOn, kAbove, kBelow };
enum class VisibilityKind { kVisible, kNotVisible };

bool proximity_holds(ProximityKind kind, const Obb& asset, const Obb& anchor, double room_size,
                     const ThresholdConfig& cfg);
bool vertical_holds(VerticalKind kind, const Obb& asset, const Obb& anchor, const ThresholdConfig& cfg);
// Pair prerequisite of `between`: the anchors are close enough together.
bool between_pair_ok(const Obb& a, const Obb& b, const ThresholdConfig& cfg);
bool between_holds(const Obb& asset, const Obb& a, const Obb& b, const ThresholdConfig& cfg);
bool facing_holds(const Obb& asset, const Obb& anchor, const ThresholdConfig& cfg);

// ---------------------------------------------------------------------------
// Instance-level checkers.

// No penetration of the scene mesh (resting contact is allowed), the
// asset is not enclosed by a closed solid, and a down-ray from the
// footprint center finds an upward-facing surface at most support_gap_tol
// below the asset bottom.
bool check_physical(const SceneModel& scene, const Asset& asset, const Placement& p,
                    const ThresholdConfig& cfg);
// Support gap seen by check_physical's down-ray (meters, negative when the
// surface is above the bottom); nullopt when nothing supports the asset.
std::optional<double> support_gap(const SceneModel& scene, const Asset& asset, const Placement& p,
                                  const ThresholdConfig& cfg);

bool check_proximity(ProximityKind kind, const SceneModel& scene, const Asset& asset,
                     const Placement& p, int anchor_id, const ThresholdConfig& cfg);
bool check_vertical(VerticalKind kind, const SceneModel& scene, const Asset& asset,
                    const Placement& p, int anchor_id, const ThresholdConfig& cfg);
// Throws ValidationError when both ids are the same.
bool check_between(const SceneModel& scene, const Asset& asset, const Placement& p, int anchor1,
                   int anchor2, const ThresholdConfig& cfg);
bool check_facing(const SceneModel& scene, const Asset& asset, const Placement& p, int anchor_id,
                  const ThresholdConfig& cfg);
bool check_visibility(VisibilityKind kind, const SceneModel& scene, const Asset& asset,
                      const Placement& p, int anchor_id, const ThresholdConfig& cfg,
                      VisibilityMode mode = VisibilityMode::kExact);

// Resolves the anchor references and evaluates one constraint. Throws
// LookupError when a referenced class or instance is missing.
bool check_constraint(const SceneModel& scene, const Asset& asset, const Placement& p,
                      const Constraint& c, const ThresholdConfig& cfg,
                      VisibilityMode mode = VisibilityMode::kExact);

// Instances a reference may resolve to, in id order. Throws LookupError
// when none exist.
std::vector<const Anchor*> resolve_anchor(const SceneModel& scene, const AnchorRef& ref);
// Instance used for visibility: the pinned one, else the largest.
const Anchor& visibility_anchor(const SceneModel& scene, const AnchorRef& ref);

struct ConstraintVerdict {
  Constraint constraint;
  bool satisfied = false;
  std::string error;  // lookup failure, empty otherwise
};

struct ValidityReport {
  // The physical-plausibility verdict always comes first and appears once;
  // the remaining constraints follow in prompt order.
  std::vector<ConstraintVerdict> verdicts;
  bool physical = true;
  bool spatial = true;
  bool rotational = true;
  bool visibility = true;
  bool language_ok = true;
  bool complete_ok = true;
};

ValidityReport evaluate_prompt(const SceneModel& scene, const Asset& asset, const Placement& p,
                               const std::vector<Constraint>& constraints, const ThresholdConfig& cfg,
                               VisibilityMode mode = VisibilityMode::kExact);

// Report as a JSON object.
std::string report_json(const ValidityReport& report);

}  // namespace placekit
