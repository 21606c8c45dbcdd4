#include "placekit/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "placekit/parallel.hpp"
#include "placekit/placement_mask.hpp"
#include "placekit/plausibility.hpp"
#include "placekit/ply.hpp"
#include "placekit/random.hpp"

namespace placekit {

namespace {

using nlohmann::json;

// Candidate constraints drawn per group slot before an attempt is abandoned.
constexpr int kDrawsPerConstraint = 8;

json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what(), e.byte);
  }
}

json constraint_to_json(const Constraint& c) {
  json anchors = json::array();
  for (const AnchorRef& a : c.anchors) {
    json r{{"class", a.label}};
    if (a.id) r["id"] = *a.id;
    anchors.push_back(r);
  }
  return {{"relation", relation_name(c.relation)}, {"anchors", anchors}};
}

Constraint constraint_from_json(const json& j) {
  if (!j.is_object() || !j.contains("relation") || !j["relation"].is_string())
    throw ValidationError("constraint needs a \"relation\" string");
  Constraint c;
  c.relation = relation_from_name(j["relation"].get<std::string>());
  if (j.contains("anchors")) {
    if (!j["anchors"].is_array()) throw ValidationError("constraint anchors must be an array");
    for (const json& a : j["anchors"]) {
      if (!a.is_object() || !a.contains("class") || !a["class"].is_string())
        throw ValidationError("anchor reference needs a \"class\" string");
      AnchorRef ref{a["class"].get<std::string>(), {}};
      if (a.contains("id")) {
        if (!a["id"].is_number_integer()) throw ValidationError("anchor id must be an integer");
        ref.id = a["id"].get<int>();
      }
      c.anchors.push_back(std::move(ref));
    }
  }
  validate(c);
  return c;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(std::move(line));
    start = end + 1;
  }
  return out;
}

double finite_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ValidationError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(what + " must be finite");
  return v;
}

}  // namespace

std::string constraints_json(const std::vector<Constraint>& constraints) {
  json arr = json::array();
  for (const Constraint& c : constraints) arr.push_back(constraint_to_json(c));
  return arr.dump();
}

std::vector<Constraint> parse_constraints_json(std::string_view text) {
  const json j = parse_json_text(text, "constraints");
  if (!j.is_array()) throw ValidationError("constraints must be a JSON array");
  std::vector<Constraint> out;
  for (const json& c : j) out.push_back(constraint_from_json(c));
  return out;
}

std::string example_json_line(const BenchmarkExample& ex) {
  json constraints = json::array();
  for (const Constraint& c : ex.constraints) constraints.push_back(constraint_to_json(c));
  json j;
  j["example_id"] = ex.example_id;
  j["scene_id"] = ex.scene_id;
  j["asset_id"] = ex.asset_id;
  j["prompt"] = ex.prompt;
  j["constraints"] = constraints;
  j["mask_file"] = ex.mask_file.empty() ? json(nullptr) : json(ex.mask_file);
  return j.dump();
}

BenchmarkExample parse_example_line(std::string_view line) {
  const json j = parse_json_text(line, "manifest row");
  BenchmarkExample ex;
  try {
    ex.example_id = j.at("example_id").get<std::string>();
    ex.scene_id = j.at("scene_id").get<std::string>();
    ex.asset_id = j.at("asset_id").get<std::string>();
    ex.prompt = j.at("prompt").get<std::string>();
    for (const json& c : j.at("constraints")) ex.constraints.push_back(constraint_from_json(c));
    if (j.contains("mask_file") && !j["mask_file"].is_null()) ex.mask_file = j["mask_file"].get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid manifest row: ") + e.what());
  }
  return ex;
}

std::vector<BenchmarkExample> read_manifest(const std::filesystem::path& file) {
  std::vector<BenchmarkExample> out;
  std::set<std::string> ids;
  std::size_t n = 0;
  for (const std::string& line : split_lines(read_file(file))) {
    ++n;
    try {
      out.push_back(parse_example_line(line));
    } catch (const ValidationError& e) {
      throw ValidationError(file.string() + " row " + std::to_string(n) + ": " + e.what());
    }
    if (!ids.insert(out.back().example_id).second)
      throw ValidationError(file.string() + ": duplicate example id " + out.back().example_id);
  }
  return out;
}

void write_manifest(const std::filesystem::path& file, const std::vector<BenchmarkExample>& examples) {
  std::string out;
  for (const BenchmarkExample& ex : examples) out += example_json_line(ex) + "\n";
  write_file(file, out);
}

std::vector<Prediction> read_submission(const std::filesystem::path& file) {
  std::vector<Prediction> out;
  std::size_t n = 0;
  for (const std::string& line : split_lines(read_file(file))) {
    ++n;
    const std::string where = file.string() + " row " + std::to_string(n);
    const json j = parse_json_text(line, where);
    if (!j.is_object() || !j.contains("example_id") || !j["example_id"].is_string() || !j.contains("t") ||
        !j["t"].is_array() || j["t"].size() != 3 || !j.contains("yaw"))
      throw ValidationError(where + ": expected {\"example_id\", \"t\": [x, y, z], \"yaw\"}");
    Prediction p;
    p.example_id = j["example_id"].get<std::string>();
    p.placement.t = {finite_number(j["t"][0], where + " t"), finite_number(j["t"][1], where + " t"),
                     finite_number(j["t"][2], where + " t")};
    p.placement.yaw = finite_number(j["yaw"], where + " yaw");
    out.push_back(std::move(p));
  }
  return out;
}

std::string submission_jsonl(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const Prediction& p : predictions) {
    json j{{"example_id", p.example_id},
           {"t", {p.placement.t.x, p.placement.t.y, p.placement.t.z}},
           {"yaw", p.placement.yaw}};
    out += j.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

void Corpus::add(SceneModel scene) {
  const std::string id = scene.id();
  scenes_.erase(id);
  scenes_.emplace(id, std::move(scene));
}

void Corpus::add(Asset asset) {
  const std::string id = asset.id();
  assets_.erase(id);
  assets_.emplace(id, std::move(asset));
}

const SceneModel& Corpus::scene(const std::string& id) const {
  const auto it = scenes_.find(id);
  if (it == scenes_.end()) throw LookupError("unknown scene \"" + id + "\"");
  return it->second;
}

const Asset& Corpus::asset(const std::string& id) const {
  const auto it = assets_.find(id);
  if (it == assets_.end()) throw LookupError("unknown asset \"" + id + "\"");
  return it->second;
}

namespace {

void load_scene_into(Corpus& corpus, const std::filesystem::path& dir, const std::string& id) {
  const auto mesh = dir / "scenes" / (id + ".ply");
  const auto anno = dir / "scenes" / (id + ".json");
  if (!std::filesystem::exists(mesh) || !std::filesystem::exists(anno)) return;
  corpus.add(ingest_scene(mesh, anno));
}

void load_asset_into(Corpus& corpus, const std::filesystem::path& dir, const std::string& id) {
  const auto mesh = dir / "assets" / (id + ".ply");
  const auto side = dir / "assets" / (id + ".json");
  if (!std::filesystem::exists(mesh) || !std::filesystem::exists(side)) return;
  corpus.add(load_asset(mesh, side));
}

std::vector<std::string> stems_with(const std::filesystem::path& dir, const std::string& ext) {
  std::vector<std::string> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto p = entry.path();
    if (p.extension() != ext) continue;
    const std::string stem = p.stem().string();
    if (stem.size() > 7 && stem.substr(stem.size() - 7) == ".points") continue;
    out.push_back(stem);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir, const std::vector<BenchmarkExample>& examples) {
  std::set<std::string> scenes;
  std::set<std::string> assets;
  for (const BenchmarkExample& ex : examples) {
    scenes.insert(ex.scene_id);
    assets.insert(ex.asset_id);
  }
  Corpus corpus;
  for (const std::string& id : scenes) load_scene_into(corpus, dir, id);
  for (const std::string& id : assets) load_asset_into(corpus, dir, id);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("no such directory: " + dir.string());
  Corpus corpus;
  for (const std::string& id : stems_with(dir / "scenes", ".ply")) load_scene_into(corpus, dir, id);
  for (const std::string& id : stems_with(dir / "assets", ".ply")) load_asset_into(corpus, dir, id);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "scenes", ec);
  std::filesystem::create_directories(dir / "assets", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [id, scene] : corpus.scenes()) export_scene(scene, dir / "scenes");
  for (const auto& [id, asset] : corpus.assets()) export_asset(asset, dir / "assets");
}

// ---------------------------------------------------------------------------

std::vector<long> largest_remainder(const std::vector<double>& weights, long total) {
  if (total < 0) throw ValidationError("quota total must be non-negative");
  double sum = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("weights must be finite and non-negative");
    sum += w;
  }
  std::vector<long> out(weights.size(), 0);
  if (total == 0) return out;
  if (!(sum > 0.0)) throw ValidationError("weights are all zero");
  std::vector<double> rem(weights.size());
  long assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double exact = weights[k] / sum * static_cast<double>(total);
    out[k] = static_cast<long>(std::floor(exact));
    rem[k] = exact - static_cast<double>(out[k]);
    assigned += out[k];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    if (weights[order[k]] > 0.0) {
      ++out[order[k]];
      ++assigned;
    }
  }
  return out;
}

std::string generation_report_json(const GenerationReport& report) {
  json j;
  j["requested"] = report.requested;
  j["emitted"] = report.emitted;
  j["failed"] = report.failed;
  j["constraints_per_example"] = {{"1", report.count_histogram[0]},
                                  {"2", report.count_histogram[1]},
                                  {"3", report.count_histogram[2]},
                                  {"4", report.count_histogram[3]}};
  j["groups"] = {{"spatial", report.group_histogram[0]},
                 {"rotational", report.group_histogram[1]},
                 {"visibility", report.group_histogram[2]}};
  return j.dump(2) + "\n";
}

GenerationReport generate_dataset(const Corpus& corpus, const GenConfig& gen, const ThresholdConfig& cfg,
                                  const TemplateLibrary& lib, std::uint64_t seed,
                                  const std::filesystem::path& out_dir, int jobs) {
  validate(cfg);
  if (gen.examples < 0) throw ValidationError("example count must be non-negative");
  if (gen.retry_budget < 1) throw ValidationError("retry budget must be at least 1");
  std::vector<std::pair<const SceneModel*, const Asset*>> pairs;
  for (const auto& [sid, scene] : corpus.scenes())
    for (const auto& [aid, asset] : corpus.assets()) pairs.emplace_back(&scene, &asset);
  if (pairs.empty()) throw ValidationError("dataset generation needs at least one scene and one asset");

  const std::size_t n = static_cast<std::size_t>(gen.examples);
  // Exact quotas for constraint counts and groups, dealt in shuffled order.
  const auto count_quota = largest_remainder({gen.count_weights.begin(), gen.count_weights.end()}, gen.examples);
  std::vector<int> counts;
  long total = 0;
  for (int k = 0; k < 4; ++k) {
    counts.insert(counts.end(), static_cast<std::size_t>(count_quota[k]), k + 1);
    total += count_quota[k] * (k + 1);
  }
  Rng(derive_seed(seed, "counts")).shuffle(counts);
  const auto group_quota = largest_remainder({gen.group_weights.begin(), gen.group_weights.end()}, total);
  std::vector<Group> pool;
  for (int g = 0; g < 3; ++g) pool.insert(pool.end(), static_cast<std::size_t>(group_quota[g]), static_cast<Group>(g + 1));
  Rng(derive_seed(seed, "groups")).shuffle(pool);
  std::vector<std::vector<Group>> groups(n);
  for (std::size_t i = 0, next = 0; i < n; ++i) {
    groups[i].assign(pool.begin() + static_cast<long>(next), pool.begin() + static_cast<long>(next + counts[i]));
    next += static_cast<std::size_t>(counts[i]);
  }
  // Facing constraints on several anchors, or several visibility
  // constraints, rarely hold together. Swap repeats for spatial slots of
  // examples without that group; the totals stay exact.
  auto holds = [&](std::size_t i, Group g) { return std::count(groups[i].begin(), groups[i].end(), g); };
  for (const Group g : {Group::kRotational, Group::kVisibility}) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 1; j < n && holds(i, g) > 1; ++j) {
        const std::size_t other = (i + j) % n;
        if (holds(other, g) > 0) continue;
        const auto spatial = std::find(groups[other].begin(), groups[other].end(), Group::kSpatial);
        if (spatial == groups[other].end()) continue;
        *std::find(groups[i].begin(), groups[i].end(), g) = Group::kSpatial;
        *spatial = g;
      }
    }
  }

  std::vector<std::optional<PlacementMask>> physical(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t k) {
    physical[k] = build_physical_context(*pairs[k].first, *pairs[k].second, cfg).mask;
  });

  struct Result {
    std::optional<BenchmarkExample> example;
    PlacementMask mask;
  };
  std::vector<Result> results(n);
  const std::uint64_t example_seed = derive_seed(seed, "examples");
  const int per_pair = std::max(1, gen.retry_budget / static_cast<int>(std::min<std::size_t>(pairs.size(), 8)));
  char id_buf[32];
  parallel_for(n, jobs, [&](std::size_t i) {
    const std::uint64_t base = derive_seed(example_seed, static_cast<std::uint64_t>(i));
    for (int attempt = 0; attempt < gen.retry_budget; ++attempt) {
      const std::size_t k = (i + static_cast<std::size_t>(attempt / per_pair)) % pairs.size();
      const SceneModel& scene = *pairs[k].first;
      const Asset& asset = *pairs[k].second;
      const std::uint64_t s = derive_seed(base, static_cast<std::uint64_t>(attempt));
      // Constraints are added one group at a time; a draw is kept only
      // while the running mask stays non-empty.
      std::vector<Constraint> constraints;
      PlacementMask running = *physical[k];
      bool complete = true;
      for (std::size_t g = 0; g < groups[i].size() && complete; ++g) {
        bool added = false;
        for (int draw = 0; draw < kDrawsPerConstraint && !added; ++draw) {
          SamplingConfig sampling;
          sampling.forced_groups = {groups[i][g]};
          Constraint c;
          try {
            c = sample_constraint_set(scene, sampling, cfg, derive_seed(derive_seed(s, g), draw)).front();
          } catch (const GenerationError&) {
            break;
          }
          if (std::find(constraints.begin(), constraints.end(), c) != constraints.end()) continue;
          PlacementMask next = combine_masks({running, constraint_point_mask(scene, asset, c, running, cfg)});
          if (next.valid_count() == 0) continue;
          running = std::move(next);
          constraints.push_back(std::move(c));
          added = true;
        }
        complete = added;
      }
      if (!complete) continue;
      Verification v{true, std::move(running)};
      BenchmarkExample ex;
      char buf[32];
      std::snprintf(buf, sizeof buf, "ex%05zu", i);
      ex.example_id = buf;
      ex.scene_id = scene.id();
      ex.asset_id = asset.id();
      ex.prompt = render_prompt(constraints, lib, s);
      ex.constraints = std::move(constraints);
      ex.mask_file = "masks/" + ex.example_id + ".plmk";
      v.mask.scene_id = scene.id();
      v.mask.asset_id = asset.id();
      v.mask.prompt_hash = prompt_hash(ex.prompt);
      results[i] = {std::move(ex), std::move(v.mask)};
      return;
    }
  });

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "masks", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "masks").string() + ": " + ec.message());
  GenerationReport report;
  report.requested = gen.examples;
  std::vector<BenchmarkExample> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (!results[i].example) {
      std::snprintf(id_buf, sizeof id_buf, "ex%05zu", i);
      report.failed.emplace_back(id_buf);
      continue;
    }
    const BenchmarkExample& ex = *results[i].example;
    write_mask(out_dir / ex.mask_file, results[i].mask);
    ++report.emitted;
    ++report.count_histogram[ex.constraints.size() - 1];
    for (const Constraint& c : ex.constraints) ++report.group_histogram[static_cast<int>(group_of(c.relation)) - 1];
    rows.push_back(ex);
  }
  write_manifest(out_dir / "manifest.jsonl", rows);
  write_file(out_dir / "report.json", generation_report_json(report));
  return report;
}

// ---------------------------------------------------------------------------

double Ratio::percent() const {
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

namespace {

ValidityReport all_unsatisfied(const std::vector<Constraint>& constraints) {
  ValidityReport r;
  r.verdicts.push_back({Constraint::plausible(), false, {}});
  for (const Constraint& c : constraints)
    if (c.relation != Relation::kPlausible) r.verdicts.push_back({c, false, {}});
  r.physical = r.spatial = r.rotational = r.visibility = r.language_ok = r.complete_ok = false;
  return r;
}

}  // namespace

MetricsReport evaluate_submission(const std::vector<BenchmarkExample>& examples,
                                  const std::vector<Prediction>& predictions, const Corpus& corpus,
                                  const ThresholdConfig& cfg, int jobs) {
  validate(cfg);
  if (examples.size() != predictions.size())
    throw ValidationError("submission has " + std::to_string(predictions.size()) + " predictions for " +
                          std::to_string(examples.size()) + " examples");
  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions)
    if (!by_id.emplace(p.example_id, &p).second)
      throw ValidationError("duplicate prediction for example " + p.example_id);
  std::vector<const Prediction*> matched;
  for (const BenchmarkExample& ex : examples) {
    const auto it = by_id.find(ex.example_id);
    if (it == by_id.end()) throw ValidationError("no prediction for example " + ex.example_id);
    matched.push_back(it->second);
  }

  MetricsReport out;
  out.examples.resize(examples.size());
  parallel_for(examples.size(), jobs, [&](std::size_t k) {
    const BenchmarkExample& ex = examples[k];
    ExampleVerdict& v = out.examples[k];
    v.example_id = ex.example_id;
    try {
      v.report = evaluate_prompt(corpus.scene(ex.scene_id), corpus.asset(ex.asset_id), matched[k]->placement,
                                 ex.constraints, cfg, VisibilityMode::kExact);
      for (const ConstraintVerdict& cv : v.report.verdicts)
        if (!cv.error.empty()) v.error = cv.error;
    } catch (const Error& e) {
      v.error = e.what();
    }
    if (!v.error.empty()) v.report = all_unsatisfied(ex.constraints);
  });

  for (const ExampleVerdict& v : out.examples) {
    ++out.complete_placement_success.den;
    ++out.language_adherence_success.den;
    out.complete_placement_success.num += v.report.complete_ok;
    out.language_adherence_success.num += v.report.language_ok;
    for (const ConstraintVerdict& cv : v.report.verdicts) {
      Ratio& g = out.group_accuracy[static_cast<int>(group_of(cv.constraint.relation))];
      ++g.den;
      ++out.global_constraint_accuracy.den;
      g.num += cv.satisfied;
      out.global_constraint_accuracy.num += cv.satisfied;
    }
  }
  return out;
}

std::string metrics_json(const MetricsReport& report) {
  auto ratio = [](const Ratio& r) {
    json j{{"satisfied", r.num}, {"total", r.den}};
    j["percent"] = r.den ? json(r.percent()) : json(nullptr);
    return j;
  };
  json j;
  j["global_constraint_accuracy"] = ratio(report.global_constraint_accuracy);
  j["complete_placement_success"] = ratio(report.complete_placement_success);
  j["language_adherence_success"] = ratio(report.language_adherence_success);
  json groups;
  for (int g = 0; g < 4; ++g) groups[std::string(group_name(static_cast<Group>(g)))] = ratio(report.group_accuracy[g]);
  j["groups"] = groups;
  j["examples"] = json::array();
  for (const ExampleVerdict& v : report.examples) {
    json e = json::parse(report_json(v.report));
    e["example_id"] = v.example_id;
    if (!v.error.empty()) e["error"] = v.error;
    j["examples"].push_back(e);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

Placement solve_baseline(const SceneModel& scene, const Asset& asset, const std::vector<Constraint>& constraints,
                         const ThresholdConfig& cfg, const BaselineOptions& options,
                         const PlacementMask* physical) {
  for (const Constraint& c : constraints) validate(c);
  std::optional<PlacementMask> own;
  if (!physical) {
    own = build_physical_context(scene, asset, cfg).mask;
    physical = &*own;
  }
  const PlacementMask mask = prompt_mask(scene, asset, constraints, *physical, cfg);
  const PointCloud& points = scene.points();
  std::vector<std::size_t> order;
  for (std::size_t n = 0; n < mask.size(); ++n)
    if (mask.valid(n)) order.push_back(n);
  if (order.empty()) throw NoSolutionError("the combined mask is empty");

  switch (options.order) {
    case CandidateOrder::kDistanceToInvalid: {
      const auto dist = distance_to_invalid(mask, points);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
      break;
    }
    case CandidateOrder::kCenterOut: {
      const Aabb b = scene.mesh().bounds();
      const Vec2 c{(b.min.x + b.max.x) / 2, (b.min.y + b.max.y) / 2};
      auto d2 = [&](std::size_t n) {
        const Vec2 d{points.positions[n].x - c.x, points.positions[n].y - c.y};
        return dot(d, d);
      };
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d2(a) < d2(b); });
      break;
    }
    case CandidateOrder::kRandom:
      Rng(derive_seed(options.seed, "baseline")).shuffle(order);
      break;
  }

  int tried = 0;
  for (const std::size_t n : order) {
    for (int y = 0; y < kRotationBins; ++y) {
      if (!((mask.bits(n) >> y) & 1)) continue;
      if (tried++ >= options.max_candidates)
        throw NoSolutionError("no candidate passed exact verification within " +
                              std::to_string(options.max_candidates) + " tries");
      const Placement p = lift_to_center_frame(points.positions[n], asset, bin_yaw(y));
      if (evaluate_prompt(scene, asset, p, constraints, cfg, VisibilityMode::kExact).complete_ok) return p;
    }
  }
  throw NoSolutionError("no candidate passed exact verification");
}

Placement extract_placement(const ScoredMask& scored, const Asset& asset, const PointCloud& points) {
  const std::size_t n = points.size();
  if (n == 0) throw ValidationError("point cloud is empty");
  if (scored.location.size() != n || scored.rotation.size() != n)
    throw ValidationError("score field size does not match the point cloud");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = scored.location[i];
    if (!std::isfinite(s)) continue;
    if (!best || s > scored.location[*best]) best = i;
  }
  if (!best) throw ValidationError("no finite location score");
  int bin = -1;
  for (int y = 0; y < kRotationBins; ++y) {
    const double s = scored.rotation[*best][static_cast<std::size_t>(y)];
    if (!std::isfinite(s)) continue;
    if (bin < 0 || s > scored.rotation[*best][static_cast<std::size_t>(bin)]) bin = y;
  }
  if (bin < 0) throw ValidationError("no finite rotation score at the selected point");
  return lift_to_center_frame(points.positions[*best], asset, bin_yaw(bin));
}

}  // namespace placekit
