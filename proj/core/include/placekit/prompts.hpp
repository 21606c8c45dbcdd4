#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "placekit/config.hpp"
#include "placekit/constraints.hpp"
#include "placekit/placement_mask.hpp"
#include "placekit/scene.hpp"

namespace placekit {

inline constexpr std::string_view kPromptPrefix = "Place the asset ";
inline constexpr std::string_view kClauseJoiner = ", and ";

// Sentence templates per relationship. Unary templates contain
// "anchor_class" once, between templates contain "anchor1_class" and
// "anchor2_class" once each, plausible templates contain no placeholder.
class TemplateLibrary {
 public:
  TemplateLibrary() = default;
  // Throws ValidationError unless `entries` covers every relationship
  // exactly once with well-formed, non-empty template lists.
  explicit TemplateLibrary(std::vector<std::pair<Relation, std::vector<std::string>>> entries);

  const std::vector<std::string>& templates(Relation r) const;
  std::size_t total() const;

  friend bool operator==(const TemplateLibrary&, const TemplateLibrary&) = default;

 private:
  std::array<std::vector<std::string>, std::size(kAllRelations)> templates_;
};

// The published template set.
const TemplateLibrary& default_templates();
std::string_view default_templates_yaml();

// Accepts the YAML layout
//   relationships:
//     - name: adjacent
//       templates: [...]
// or its JSON mirror {"relationships": [{"name": ..., "templates": [...]}]}.
// Text starting with '{' is read as JSON.
TemplateLibrary parse_templates(std::string_view text);
TemplateLibrary load_templates(const std::filesystem::path& file);
std::string templates_yaml(const TemplateLibrary& lib);
std::string templates_json(const TemplateLibrary& lib);

// Constraint groups drawn per prompt.
struct SamplingConfig {
  // Weight of each constraint count 1, 2, 3, 4.
  std::array<double, 4> count_weights{900, 1871, 637, 92};
  // Weights of the spatial, rotational and visibility groups.
  std::array<double, 3> group_weights{4208, 1503, 1210};
  // When non-empty, the groups to draw (count_weights is then ignored).
  std::vector<Group> forced_groups;
};

// Draws constraints for the scene's anchors: the relation uniformly within
// its group, then the anchor class uniformly among eligible classes.
// Between pairs are distinct-class instance pairs at most
// between_anchor_max_dist apart; visibility anchors are restricted to
// cfg.visibility_classes. A set never repeats a constraint. Relations and
// anchors use independent streams derived from `seed`. Throws
// GenerationError when a group has no eligible anchor.
std::vector<Constraint> sample_constraint_set(const SceneModel& scene, const SamplingConfig& sampling,
                                              const ThresholdConfig& cfg, std::uint64_t seed);

// "Place the asset " + clauses joined by ", and ". One template per
// constraint, chosen uniformly from the seed's template stream. Throws
// ValidationError for a constraint without anchors where one is needed.
std::string render_prompt(const std::vector<Constraint>& constraints, const TemplateLibrary& lib,
                          std::uint64_t seed);
// Renders one constraint with an explicit template index.
std::string render_clause(const Constraint& c, const TemplateLibrary& lib, std::size_t index);

// Inverse of render_prompt. Each clause is matched against every template;
// among structural matches the one with the most literal text wins, and
// placeholders must name classes in `vocabulary`. Throws ParseError
// (with the clause's byte span) when no template matches a clause, and
// ResolutionError when a matching clause names an unknown class.
std::vector<Constraint> parse_prompt(std::string_view text, const TemplateLibrary& lib,
                                     const std::vector<std::string>& vocabulary);

struct Verification {
  bool satisfiable = false;
  PlacementMask mask;
};

// Combined mask of the constraints on top of a precomputed physical mask.
Verification verify_prompt(const SceneModel& scene, const Asset& asset,
                           const std::vector<Constraint>& constraints, const PlacementMask& physical,
                           const ThresholdConfig& cfg, int jobs = 1);
// Builds the physical mask first.
Verification verify_prompt(const SceneModel& scene, const Asset& asset,
                           const std::vector<Constraint>& constraints, const ThresholdConfig& cfg,
                           int jobs = 1);

}  // namespace placekit
