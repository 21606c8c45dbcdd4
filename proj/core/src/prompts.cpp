#include "placekit/prompts.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "placekit/errors.hpp"
#include "placekit/masks.hpp"
#include "placekit/ply.hpp"
#include "placekit/random.hpp"

namespace placekit {

namespace {

constexpr std::string_view kAnchor = "anchor_class";
constexpr std::string_view kAnchor1 = "anchor1_class";
constexpr std::string_view kAnchor2 = "anchor2_class";

constexpr std::string_view kDefaultYaml = R"(relationships:
  - name: plausible
    templates:
      - in a plausible location
      - in a sensible location
      - in a reasonable spot
      - in a suitable position
      - in a feasible area
      - somewhere stable within the scene
      - at a steady spot in the scene
      - in a secure location within the scene
      - in a firm position in the scene
      - in an area that suits the scene's layout
  - name: adjacent
    templates:
      - adjacent to the anchor_class
      - next to the anchor_class
      - beside the anchor_class
      - right beside the anchor_class
      - alongside the anchor_class
      - abutting the anchor_class
  - name: between
    templates:
      - between the anchor1_class and the anchor2_class
      - in the space between the anchor1_class and the anchor2_class
      - positioned between the anchor1_class and the anchor2_class
      - in the middle of the anchor1_class and the anchor2_class
  - name: facing
    templates:
      - facing the anchor_class
      - directed at the anchor_class
      - pointing towards the anchor_class
      - oriented towards the anchor_class
      - looking at the anchor_class
      - angled toward the anchor_class
      - turned towards the anchor_class
  - name: near
    templates:
      - near the anchor_class
      - close to the anchor_class
      - in the vicinity of the anchor_class
      - not far from the anchor_class
      - within reach of the anchor_class
      - a short distance from the anchor_class
  - name: on
    templates:
      - on the anchor_class
      - resting on the anchor_class
      - placed on the anchor_class
      - sitting on the anchor_class
      - lying on the anchor_class
  - name: above
    templates:
      - above the anchor_class
      - over the anchor_class
      - higher than the anchor_class
      - up above the anchor_class
  - name: below
    templates:
      - below the anchor_class
      - under the anchor_class
      - beneath the anchor_class
      - underneath the anchor_class
      - lower than the anchor_class
      - situated under the anchor_class
      - right below the anchor_class
  - name: is_visible
    templates:
      - visible from the anchor_class
      - in view of the anchor_class
      - within sight of the anchor_class
      - seen from the anchor_class
      - not obstructing the view to the anchor_class
      - keeping the view to the anchor_class clear
      - positioned to avoid blocking the anchor_class
      - allowing an unobstructed view of the anchor_class
  - name: not_visible
    templates:
      - not visible from the anchor_class
      - out of sight of the anchor_class
      - hidden from the anchor_class
      - obstructing the view to the anchor_class
      - blocking the view to the anchor_class
      - in the way of the anchor_class
      - preventing a clear view of the anchor_class
)";

std::size_t relation_index(Relation r) {
  for (std::size_t k = 0; k < std::size(kAllRelations); ++k)
    if (kAllRelations[k] == r) return k;
  return 0;
}

std::size_t count_of(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

void validate_template(Relation r, const std::string& t) {
  const std::size_t unary = count_of(t, kAnchor);
  const std::size_t first = count_of(t, kAnchor1);
  const std::size_t second = count_of(t, kAnchor2);
  const std::string where = "template \"" + t + "\" of " + std::string(relation_name(r));
  if (t.empty()) throw ValidationError("empty template for " + std::string(relation_name(r)));
  if (t.find(kClauseJoiner) != std::string::npos) throw ValidationError(where + " contains the clause joiner");
  switch (arity(r)) {
    case 0:
      if (unary + first + second) throw ValidationError(where + " must not contain placeholders");
      break;
    case 1:
      if (unary != 1 || first + second) throw ValidationError(where + " needs exactly one anchor_class");
      break;
    default:
      if (unary || first != 1 || second != 1 || t.find(kAnchor1) > t.find(kAnchor2))
        throw ValidationError(where + " needs anchor1_class followed by anchor2_class");
  }
}

std::vector<std::pair<Relation, std::vector<std::string>>> entries_from_pairs(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& raw) {
  std::vector<std::pair<Relation, std::vector<std::string>>> out;
  for (const auto& [name, list] : raw) out.emplace_back(relation_from_name(name), list);
  return out;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
    text.replace(pos, from.size(), to);
  return text;
}

}  // namespace

TemplateLibrary::TemplateLibrary(std::vector<std::pair<Relation, std::vector<std::string>>> entries) {
  std::array<bool, std::size(kAllRelations)> seen{};
  for (auto& [r, list] : entries) {
    const std::size_t k = relation_index(r);
    if (seen[k]) throw ValidationError("relationship " + std::string(relation_name(r)) + " listed twice");
    seen[k] = true;
    if (list.empty()) throw ValidationError("relationship " + std::string(relation_name(r)) + " has no templates");
    for (const std::string& t : list) validate_template(r, t);
    templates_[k] = std::move(list);
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k])
      throw ValidationError("template library is missing relationship " +
                            std::string(relation_name(kAllRelations[k])));
}

const std::vector<std::string>& TemplateLibrary::templates(Relation r) const {
  return templates_[relation_index(r)];
}

std::size_t TemplateLibrary::total() const {
  std::size_t n = 0;
  for (const auto& list : templates_) n += list.size();
  return n;
}

std::string_view default_templates_yaml() { return kDefaultYaml; }

const TemplateLibrary& default_templates() {
  static const TemplateLibrary lib = parse_templates(kDefaultYaml);
  return lib;
}

TemplateLibrary parse_templates(std::string_view text) {
  std::vector<std::pair<std::string, std::vector<std::string>>> raw;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("template JSON: ") + e.what(), e.byte);
    }
    if (!j.is_object() || !j.contains("relationships") || !j["relationships"].is_array())
      throw ValidationError("template JSON needs a \"relationships\" array");
    for (const auto& entry : j["relationships"]) {
      if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() ||
          !entry.contains("templates") || !entry["templates"].is_array())
        throw ValidationError("template entries need a name and a templates array");
      std::vector<std::string> list;
      for (const auto& t : entry["templates"]) {
        if (!t.is_string()) throw ValidationError("templates must be strings");
        list.push_back(t.get<std::string>());
      }
      raw.emplace_back(entry["name"].get<std::string>(), std::move(list));
    }
    return TemplateLibrary(entries_from_pairs(raw));
  }
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(std::string("template YAML: ") + e.msg, static_cast<std::size_t>(std::max(0, e.mark.pos)));
  }
  const YAML::Node rels = root["relationships"];
  if (!rels || !rels.IsSequence()) throw ValidationError("template YAML needs a \"relationships\" sequence");
  for (const YAML::Node& entry : rels) {
    if (!entry.IsMap() || !entry["name"] || !entry["templates"] || !entry["templates"].IsSequence())
      throw ValidationError("template entries need a name and a templates sequence");
    std::vector<std::string> list;
    for (const YAML::Node& t : entry["templates"]) {
      if (!t.IsScalar()) throw ValidationError("templates must be strings");
      list.push_back(t.as<std::string>());
    }
    raw.emplace_back(entry["name"].as<std::string>(), std::move(list));
  }
  return TemplateLibrary(entries_from_pairs(raw));
}

TemplateLibrary load_templates(const std::filesystem::path& file) { return parse_templates(read_file(file)); }

std::string templates_yaml(const TemplateLibrary& lib) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "relationships" << YAML::Value << YAML::BeginSeq;
  for (const Relation r : kAllRelations) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << std::string(relation_name(r));
    out << YAML::Key << "templates" << YAML::Value << YAML::BeginSeq;
    for (const std::string& t : lib.templates(r)) out << t;
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string templates_json(const TemplateLibrary& lib) {
  nlohmann::json rels = nlohmann::json::array();
  for (const Relation r : kAllRelations)
    rels.push_back({{"name", relation_name(r)}, {"templates", lib.templates(r)}});
  return nlohmann::json{{"relationships", rels}}.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::vector<Constraint> sample_constraint_set(const SceneModel& scene, const SamplingConfig& sampling,
                                              const ThresholdConfig& cfg, std::uint64_t seed) {
  Rng rel_rng(derive_seed(seed, "relations"));
  Rng anchor_rng(derive_seed(seed, "anchors"));

  std::vector<Group> groups = sampling.forced_groups;
  if (groups.empty()) {
    const int count = rel_rng.weighted({sampling.count_weights.begin(), sampling.count_weights.end()});
    if (count < 0) throw ValidationError("constraint count weights are all zero");
    for (int k = 0; k <= count; ++k) {
      const int g = rel_rng.weighted({sampling.group_weights.begin(), sampling.group_weights.end()});
      if (g < 0) throw ValidationError("constraint group weights are all zero");
      groups.push_back(static_cast<Group>(g + 1));
    }
  }

  const std::vector<std::string> classes = scene.vocabulary();
  std::vector<std::string> visible_classes;
  for (const std::string& c : classes)
    if (std::find(cfg.visibility_classes.begin(), cfg.visibility_classes.end(), c) != cfg.visibility_classes.end())
      visible_classes.push_back(c);
  // Distinct-class pairs with at least one pair of instances close enough.
  std::set<std::pair<std::string, std::string>> pair_set;
  const auto& anchors = scene.anchors();
  for (std::size_t a = 0; a < anchors.size(); ++a)
    for (std::size_t b = 0; b < anchors.size(); ++b)
      if (anchors[a].label != anchors[b].label && between_pair_ok(anchors[a].box, anchors[b].box, cfg))
        pair_set.emplace(anchors[a].label, anchors[b].label);
  const std::vector<std::pair<std::string, std::string>> pairs(pair_set.begin(), pair_set.end());

  auto relations_of = [&](Group g) {
    std::vector<Relation> out;
    for (const Relation r : kAllRelations) {
      if (group_of(r) != g) continue;
      if (r == Relation::kBetween && pairs.empty()) continue;
      if (g == Group::kVisibility && visible_classes.empty()) continue;
      if (arity(r) == 1 && classes.empty()) continue;
      out.push_back(r);
    }
    return out;
  };

  std::vector<Constraint> out;
  for (const Group g : groups) {
    const auto options = relations_of(g);
    if (options.empty())
      throw GenerationError("scene " + scene.id() + " has no anchors for a " + std::string(group_name(g)) +
                            " constraint");
    bool added = false;
    for (int attempt = 0; attempt < 64 && !added; ++attempt) {
      const Relation r = options[rel_rng.below(options.size())];
      Constraint c;
      if (r == Relation::kPlausible) {
        c = Constraint::plausible();
      } else if (r == Relation::kBetween) {
        const auto& [a, b] = pairs[anchor_rng.below(pairs.size())];
        c = Constraint::between({a, {}}, {b, {}});
      } else {
        const auto& pool = g == Group::kVisibility ? visible_classes : classes;
        c = Constraint::unary(r, {pool[anchor_rng.below(pool.size())], {}});
      }
      if (std::find(out.begin(), out.end(), c) != out.end()) continue;
      out.push_back(std::move(c));
      added = true;
    }
    if (!added)
      throw GenerationError("could not draw a distinct " + std::string(group_name(g)) + " constraint for scene " +
                            scene.id());
  }
  return out;
}

std::string render_clause(const Constraint& c, const TemplateLibrary& lib, std::size_t index) {
  validate(c);
  const auto& list = lib.templates(c.relation);
  if (index >= list.size())
    throw ValidationError("no template " + std::to_string(index) + " for " + std::string(relation_name(c.relation)));
  std::string text = list[index];
  for (const AnchorRef& a : c.anchors)
    if (a.label.empty()) throw ValidationError("anchor class label is empty");
  if (c.anchors.size() == 1) text = replace_all(text, kAnchor, c.anchors[0].label);
  if (c.anchors.size() == 2) {
    // Substitute the second placeholder first so a label cannot create one.
    const auto p2 = text.find(kAnchor2);
    text.replace(p2, kAnchor2.size(), c.anchors[1].label);
    const auto p1 = text.find(kAnchor1);
    text.replace(p1, kAnchor1.size(), c.anchors[0].label);
  }
  return text;
}

std::string render_prompt(const std::vector<Constraint>& constraints, const TemplateLibrary& lib,
                          std::uint64_t seed) {
  if (constraints.empty()) throw ValidationError("a prompt needs at least one constraint");
  Rng rng(derive_seed(seed, "templates"));
  std::string text(kPromptPrefix);
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const std::size_t n = lib.templates(constraints[k].relation).size();
    if (k) text += kClauseJoiner;
    text += render_clause(constraints[k], lib, rng.below(n));
  }
  return text;
}

namespace {

struct Match {
  std::size_t literal = 0;
  Relation relation = Relation::kPlausible;
  std::vector<std::vector<std::string>> labelings;  // candidate label assignments
};

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

std::optional<Match> match_template(std::string_view clause, Relation r, std::string_view t) {
  Match m;
  m.relation = r;
  if (arity(r) == 0) {
    if (clause != t) return std::nullopt;
    m.literal = t.size();
    m.labelings.push_back({});
    return m;
  }
  if (arity(r) == 1) {
    const auto pos = t.find(kAnchor);
    const std::string_view pre = t.substr(0, pos);
    const std::string_view post = t.substr(pos + kAnchor.size());
    if (clause.size() <= pre.size() + post.size() || !starts_with(clause, pre) || !ends_with(clause, post))
      return std::nullopt;
    m.literal = pre.size() + post.size();
    m.labelings.push_back({std::string(clause.substr(pre.size(), clause.size() - pre.size() - post.size()))});
    return m;
  }
  const auto p1 = t.find(kAnchor1);
  const auto p2 = t.find(kAnchor2);
  const std::string_view pre = t.substr(0, p1);
  const std::string_view mid = t.substr(p1 + kAnchor1.size(), p2 - p1 - kAnchor1.size());
  const std::string_view post = t.substr(p2 + kAnchor2.size());
  if (clause.size() <= pre.size() + mid.size() + post.size() || !starts_with(clause, pre) || !ends_with(clause, post))
    return std::nullopt;
  const std::string_view body = clause.substr(pre.size(), clause.size() - pre.size() - post.size());
  for (auto pos = body.find(mid); pos != std::string_view::npos; pos = body.find(mid, pos + 1)) {
    if (pos == 0 || pos + mid.size() >= body.size()) continue;
    m.labelings.push_back({std::string(body.substr(0, pos)), std::string(body.substr(pos + mid.size()))});
  }
  if (m.labelings.empty()) return std::nullopt;
  m.literal = pre.size() + mid.size() + post.size();
  return m;
}

}  // namespace

std::vector<Constraint> parse_prompt(std::string_view text, const TemplateLibrary& lib,
                                     const std::vector<std::string>& vocabulary) {
  if (!starts_with(text, kPromptPrefix))
    throw ParseError("prompt must start with \"" + std::string(kPromptPrefix) + "\"", 0, text.size());
  std::size_t end = text.size();
  while (end > kPromptPrefix.size() && (text[end - 1] == ' ' || text[end - 1] == '\n' || text[end - 1] == '\r')) --end;
  if (end > kPromptPrefix.size() && text[end - 1] == '.') --end;
  const std::set<std::string, std::less<>> vocab(vocabulary.begin(), vocabulary.end());

  std::vector<Constraint> out;
  std::size_t start = kPromptPrefix.size();
  while (true) {
    std::size_t stop = text.find(kClauseJoiner, start);
    if (stop == std::string_view::npos || stop > end) stop = end;
    const std::string_view clause = text.substr(start, stop - start);
    if (clause.empty()) throw ParseError("empty clause", start, 0);

    std::vector<Match> matches;
    for (const Relation r : kAllRelations)
      for (const std::string& t : lib.templates(r))
        if (auto m = match_template(clause, r, t)) matches.push_back(std::move(*m));
    if (matches.empty())
      throw ParseError("no template matches \"" + std::string(clause) + "\"", start, clause.size());
    std::stable_sort(matches.begin(), matches.end(),
                     [](const Match& a, const Match& b) { return a.literal > b.literal; });

    std::optional<Constraint> found;
    std::size_t found_literal = 0;
    for (const Match& m : matches) {
      if (found && m.literal < found_literal) break;
      for (const auto& labels : m.labelings) {
        if (!std::all_of(labels.begin(), labels.end(), [&](const std::string& l) { return vocab.count(l) > 0; }))
          continue;
        Constraint c{m.relation, {}};
        for (const std::string& l : labels) c.anchors.push_back({l, {}});
        if (found && *found != c)
          throw ParseError("clause \"" + std::string(clause) + "\" is ambiguous", start, clause.size());
        found = std::move(c);
        found_literal = m.literal;
      }
    }
    if (!found) {
      const Match& best = matches.front();
      std::string unknown;
      for (const std::string& l : best.labelings.front())
        if (!vocab.count(l)) unknown = l;
      throw ResolutionError("unknown anchor class \"" + unknown + "\" in clause \"" + std::string(clause) + "\"");
    }
    out.push_back(std::move(*found));
    if (stop == end) break;
    start = stop + kClauseJoiner.size();
  }
  return out;
}

Verification verify_prompt(const SceneModel& scene, const Asset& asset,
                           const std::vector<Constraint>& constraints, const PlacementMask& physical,
                           const ThresholdConfig& cfg, int jobs) {
  Verification v;
  v.mask = prompt_mask(scene, asset, constraints, physical, cfg, jobs);
  v.satisfiable = v.mask.valid_count() > 0;
  return v;
}

Verification verify_prompt(const SceneModel& scene, const Asset& asset,
                           const std::vector<Constraint>& constraints, const ThresholdConfig& cfg, int jobs) {
  const PhysicalContext ctx = build_physical_context(scene, asset, cfg, jobs);
  return verify_prompt(scene, asset, constraints, ctx.mask, cfg, jobs);
}

}  // namespace placekit
