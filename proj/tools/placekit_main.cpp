#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "placekit/bench.hpp"
#include "placekit/config.hpp"
#include "placekit/constraints.hpp"
#include "placekit/errors.hpp"
#include "placekit/log.hpp"
#include "placekit/masks.hpp"
#include "placekit/parallel.hpp"
#include "placekit/placement_mask.hpp"
#include "placekit/ply.hpp"
#include "placekit/prompts.hpp"
#include "placekit/random.hpp"
#include "placekit/scene.hpp"
#include "placekit/synth.hpp"
#include "placekit/version.hpp"

namespace fs = std::filesystem;
using namespace placekit;
using nlohmann::json;

namespace {

constexpr const char* kConfigEnv = "PLACEKIT_CONFIG";

struct Globals {
  std::string config_path;
  int jobs = 1;
};

ThresholdConfig load_thresholds(const Globals& g) {
  std::string path = g.config_path;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  ThresholdConfig cfg = path.empty() ? ThresholdConfig{} : load_config(path);
  validate(cfg);
  return cfg;
}

TemplateLibrary load_library(const std::string& path) {
  return path.empty() ? default_templates() : load_templates(path);
}

Vec3 parse_vec3(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("expected x,y,z, got \"" + text + "\"");
    }
  }
  if (v.size() != 3) throw ValidationError("expected x,y,z, got \"" + text + "\"");
  return {v[0], v[1], v[2]};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<Constraint> constraints_from_arg(const std::string& arg) {
  if (!arg.empty() && arg.front() != '[' && fs::exists(arg)) return parse_constraints_json(read_file(arg));
  return parse_constraints_json(arg);
}

// ---------------------------------------------------------------------------

void cmd_synth(const std::string& spec_file, std::optional<std::uint64_t> seed, const std::string& out) {
  SynthSceneSpec spec;
  if (!spec_file.empty()) {
    spec = parse_synth_spec(read_file(spec_file));
  } else if (seed) {
    spec = random_room_spec(*seed);
  } else {
    throw ValidationError("synth needs --spec or --seed");
  }
  const SceneModel scene = generate_synthetic_scene(spec);
  ensure_dir(out);
  export_scene(scene, out);
  write_file(fs::path(out) / (scene.id() + ".spec.json"), synth_spec_json(spec));
  std::cerr << "wrote scene " << scene.id() << " (" << scene.mesh().triangle_count() << " triangles, "
            << scene.points().size() << " points, " << scene.anchors().size() << " anchors) to " << out << "\n";
}

struct GenArgs {
  std::uint64_t seed = 0;
  std::string out;
  std::string data;
  std::string gen_config;
  std::string templates;
  int scenes = 3;
  int examples = 10;
};

GenConfig load_gen_config(const GenArgs& a) {
  GenConfig gen;
  gen.examples = a.examples;
  if (a.gen_config.empty()) return gen;
  json j;
  try {
    j = json::parse(read_file(a.gen_config));
    for (const auto& [key, value] : j.items()) {
      if (key == "examples") gen.examples = value.get<int>();
      else if (key == "retry_budget") gen.retry_budget = value.get<int>();
      else if (key == "count_weights") gen.count_weights = value.get<std::array<double, 4>>();
      else if (key == "group_weights") gen.group_weights = value.get<std::array<double, 3>>();
      else throw ValidationError("unknown generation setting \"" + key + "\"");
    }
  } catch (const json::exception& e) {
    throw ValidationError(a.gen_config + ": " + e.what());
  }
  return gen;
}

void cmd_gen(const GenArgs& a, const Globals& g) {
  const ThresholdConfig cfg = load_thresholds(g);
  const GenConfig gen = load_gen_config(a);
  const TemplateLibrary lib = load_library(a.templates);
  const fs::path out = a.out;
  ensure_dir(out);
  if (a.data.empty()) {
    // Synthesize rooms and assets, then reload them from disk so that
    // every later step sees exactly what was written.
    if (a.scenes < 1) throw ValidationError("--scenes must be at least 1");
    Corpus fresh;
    for (int k = 0; k < a.scenes; ++k) {
      SynthSceneSpec spec = random_room_spec(derive_seed(a.seed, static_cast<std::uint64_t>(k)));
      char id[32];
      std::snprintf(id, sizeof id, "room%03d", k);
      spec.scene_id = id;
      fresh.add(generate_synthetic_scene(spec));
    }
    for (Asset& asset : standard_assets()) fresh.add(std::move(asset));
    save_corpus(fresh, out);
  } else if (fs::weakly_canonical(a.data) != fs::weakly_canonical(out)) {
    save_corpus(load_corpus(a.data), out);
  }
  const Corpus corpus = load_corpus(out);
  const GenerationReport report = generate_dataset(corpus, gen, cfg, lib, a.seed, out, g.jobs);
  std::cerr << "emitted " << report.emitted << " of " << report.requested << " examples into " << out.string()
            << "\n";
  if (!report.failed.empty())
    std::cerr << report.failed.size() << " example(s) found no satisfiable prompt within the retry budget\n";
}

void cmd_check(const std::string& scene_file, const std::string& anno_file, const std::string& asset_file,
               const std::string& sidecar, const std::string& prompt, const std::string& constraints,
               const std::string& templates, const std::string& t, double yaw, const Globals& g) {
  const ThresholdConfig cfg = load_thresholds(g);
  const SceneModel scene = ingest_scene(fs::path(scene_file), fs::path(anno_file));
  const Asset asset = sidecar.empty() && !fs::exists(sidecar_path_for(asset_file))
                          ? Asset::from_mesh(fs::path(asset_file).stem().string(), read_ply(asset_file))
                          : load_asset(asset_file, sidecar.empty() ? sidecar_path_for(asset_file) : fs::path(sidecar));
  std::vector<Constraint> cs;
  if (!constraints.empty()) cs = constraints_from_arg(constraints);
  else if (!prompt.empty()) cs = parse_prompt(prompt, load_library(templates), scene.vocabulary());
  else throw ValidationError("check needs --prompt or --constraints");
  const Placement p{parse_vec3(t), yaw};
  std::cout << report_json(evaluate_prompt(scene, asset, p, cs, cfg, VisibilityMode::kExact));
}

fs::path data_dir_for(const std::string& data, const std::string& manifest) {
  return data.empty() ? fs::path(manifest).parent_path() : fs::path(data);
}

void cmd_eval(const std::string& manifest, const std::string& submission, const std::string& data,
              const std::string& out, const Globals& g) {
  const ThresholdConfig cfg = load_thresholds(g);
  const auto examples = read_manifest(manifest);
  const auto predictions = read_submission(submission);
  const Corpus corpus = load_corpus(data_dir_for(data, manifest), examples);
  const MetricsReport report = evaluate_submission(examples, predictions, corpus, cfg, g.jobs);
  const std::string text = metrics_json(report);
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  std::cerr << "complete placement success " << report.complete_placement_success.num << "/"
            << report.complete_placement_success.den << "\n";
}

void cmd_solve(const std::string& manifest, const std::string& data, const std::string& out,
               const std::string& order, std::uint64_t seed, const Globals& g) {
  const ThresholdConfig cfg = load_thresholds(g);
  const auto examples = read_manifest(manifest);
  const Corpus corpus = load_corpus(data_dir_for(data, manifest), examples);
  BaselineOptions options;
  options.seed = seed;
  if (order == "distance") options.order = CandidateOrder::kDistanceToInvalid;
  else if (order == "center") options.order = CandidateOrder::kCenterOut;
  else if (order == "random") options.order = CandidateOrder::kRandom;
  else throw ValidationError("unknown --order \"" + order + "\"");

  // One physical mask per (scene, asset) pair.
  std::map<std::pair<std::string, std::string>, PlacementMask> physical;
  for (const BenchmarkExample& ex : examples)
    if (corpus.has_scene(ex.scene_id) && corpus.has_asset(ex.asset_id)) physical.try_emplace({ex.scene_id, ex.asset_id});
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& [k, v] : physical) keys.push_back(k);
  parallel_for(keys.size(), g.jobs, [&](std::size_t i) {
    physical[keys[i]] = build_physical_context(corpus.scene(keys[i].first), corpus.asset(keys[i].second), cfg).mask;
  });

  std::vector<Prediction> preds(examples.size());
  std::vector<std::string> failures(examples.size());
  parallel_for(examples.size(), g.jobs, [&](std::size_t i) {
    const BenchmarkExample& ex = examples[i];
    preds[i].example_id = ex.example_id;
    try {
      const SceneModel& scene = corpus.scene(ex.scene_id);
      const Asset& asset = corpus.asset(ex.asset_id);
      preds[i].placement =
          solve_baseline(scene, asset, ex.constraints, cfg, options, &physical.at({ex.scene_id, ex.asset_id}));
    } catch (const Error& e) {
      failures[i] = e.what();
      if (corpus.has_scene(ex.scene_id)) {
        const Aabb b = corpus.scene(ex.scene_id).mesh().bounds();
        preds[i].placement = {(b.min + b.max) * 0.5, 0.0};
      }
    }
  });
  int failed = 0;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (!failures[i].empty()) {
      ++failed;
      std::cerr << examples[i].example_id << ": " << failures[i] << "; wrote the scene center instead\n";
    }
  write_file(out, submission_jsonl(preds));
  std::cerr << "solved " << examples.size() - failed << " of " << examples.size() << " examples\n";
}

void cmd_prompt_render(const std::string& constraints, const std::string& templates, std::uint64_t seed) {
  std::cout << render_prompt(constraints_from_arg(constraints), load_library(templates), seed) << "\n";
}

void cmd_prompt_parse(const std::string& text, const std::string& vocab, const std::string& anno,
                      const std::string& templates) {
  std::vector<std::string> words;
  if (!anno.empty()) {
    const json j = json::parse(read_file(anno), nullptr, false);
    if (j.is_discarded() || !j.contains("anchors")) throw ValidationError(anno + " is not an annotation file");
    std::set<std::string> labels;
    for (const auto& a : j["anchors"]) labels.insert(a.value("class", ""));
    words.assign(labels.begin(), labels.end());
  }
  std::stringstream ss(vocab);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) words.push_back(item);
  if (words.empty()) throw ValidationError("prompt parse needs --vocab or --anno");
  std::cout << json::parse(constraints_json(parse_prompt(text, load_library(templates), words))).dump(2) << "\n";
}

void cmd_stats(const std::string& manifest) {
  const auto examples = read_manifest(manifest);
  const fs::path dir = fs::path(manifest).parent_path();
  std::map<std::string, long> per_count, per_group, per_relation, per_scene, per_asset;
  long mask_points = 0;
  long mask_valid = 0;
  int masks = 0;
  for (const BenchmarkExample& ex : examples) {
    ++per_count[std::to_string(ex.constraints.size())];
    for (const Constraint& c : ex.constraints) {
      ++per_group[std::string(group_name(group_of(c.relation)))];
      ++per_relation[std::string(relation_name(c.relation))];
    }
    ++per_scene[ex.scene_id];
    ++per_asset[ex.asset_id];
    if (!ex.mask_file.empty() && fs::exists(dir / ex.mask_file)) {
      const PlacementMask m = read_mask(dir / ex.mask_file);
      mask_points += static_cast<long>(m.size());
      mask_valid += static_cast<long>(m.valid_count());
      ++masks;
    }
  }
  json j;
  j["examples"] = examples.size();
  j["constraints_per_example"] = per_count;
  j["groups"] = per_group;
  j["relations"] = per_relation;
  j["scenes"] = per_scene;
  j["assets"] = per_asset;
  j["masks"] = {{"files", masks},
                {"points", mask_points},
                {"valid_points", mask_valid},
                {"valid_fraction", mask_points ? static_cast<double>(mask_valid) / mask_points : 0.0}};
  std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"placekit: language-guided 3D object placement engine"};
  app.require_subcommand(1, 1);
  Globals g;
  app.add_option("--config", g.config_path,
                 std::string("Threshold config JSON (default: $") + kConfigEnv + " or built-in values)");
  app.add_option("-j,--jobs", g.jobs, "Worker threads (gen, eval, solve); output does not depend on it")
      ->check(CLI::Range(1, 256));
  app.set_version_flag("--version", std::string("placekit ") + std::string(kVersion) + " (mask format " +
                                        std::to_string(kMaskFormatVersion) + ", manifest format " +
                                        std::string(kManifestVersion) + ")");

  std::string spec_file, out, data, manifest, submission, templates;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic room (mesh, points, annotations)");
  synth->add_option("--spec", spec_file, "SynthSceneSpec JSON");
  synth->add_option("--seed", synth_seed, "Random room seed (when no --spec)");
  synth->add_option("--out", out, "Output directory")->required();

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a dataset: prompts, masks and manifest");
  gen->add_option("--seed", gen_args.seed, "Generation seed")->required();
  gen->add_option("--out", gen_args.out, "Output directory")->required();
  gen->add_option("--data", gen_args.data, "Directory with scenes/ and assets/ (default: synthesize)");
  gen->add_option("--scenes", gen_args.scenes, "Synthetic rooms to create when --data is absent");
  gen->add_option("--examples", gen_args.examples, "Examples to generate");
  gen->add_option("--gen-config", gen_args.gen_config, "JSON with examples, count_weights, group_weights, retry_budget");
  gen->add_option("--templates", gen_args.templates, "Template library (YAML or JSON)");

  std::string scene_file, anno_file, asset_file, sidecar, prompt, constraints, t;
  double yaw = 0.0;
  auto* check = app.add_subcommand("check", "Check one placement; prints a ValidityReport");
  check->add_option("--scene", scene_file, "Scene mesh PLY")->required();
  check->add_option("--anno", anno_file, "Scene annotation JSON")->required();
  check->add_option("--asset", asset_file, "Asset mesh PLY")->required();
  check->add_option("--asset-sidecar", sidecar, "Asset sidecar JSON (default: next to the PLY)");
  check->add_option("--prompt", prompt, "Prompt text");
  check->add_option("--constraints", constraints, "Constraint JSON (inline or file)");
  check->add_option("--templates", templates, "Template library (YAML or JSON)");
  check->add_option("--t", t, "Asset center x,y,z")->required();
  check->add_option("--yaw", yaw, "Yaw in radians");

  std::string metrics_out;
  auto* eval = app.add_subcommand("eval", "Score a submission; prints MetricsReport JSON");
  eval->add_option("--manifest", manifest, "Manifest JSONL")->required();
  eval->add_option("--submission", submission, "Submission JSONL")->required();
  eval->add_option("--data", data, "Directory with scenes/ and assets/ (default: manifest directory)");
  eval->add_option("--out", metrics_out, "Write metrics here instead of standard output");

  std::string order = "distance";
  std::uint64_t solve_seed = 0;
  auto* solve = app.add_subcommand("solve", "Run the rule-based baseline; writes a submission");
  solve->add_option("--manifest", manifest, "Manifest JSONL")->required();
  solve->add_option("--data", data, "Directory with scenes/ and assets/ (default: manifest directory)");
  solve->add_option("--out", out, "Submission JSONL to write")->required();
  solve->add_option("--order", order, "Candidate order: distance, center or random");
  solve->add_option("--seed", solve_seed, "Seed for --order random");

  auto* prompt_cmd = app.add_subcommand("prompt", "Render or parse prompts");
  prompt_cmd->require_subcommand(1, 1);
  std::uint64_t render_seed = 0;
  auto* render = prompt_cmd->add_subcommand("render", "Constraints JSON to text");
  render->add_option("--constraints", constraints, "Constraint JSON (inline or file)")->required();
  render->add_option("--seed", render_seed, "Template choice seed");
  render->add_option("--templates", templates, "Template library (YAML or JSON)");
  std::string text, vocab;
  auto* parse = prompt_cmd->add_subcommand("parse", "Text to constraints JSON");
  parse->add_option("--text", text, "Prompt text")->required();
  parse->add_option("--vocab", vocab, "Comma separated anchor classes");
  parse->add_option("--anno", anno_file, "Scene annotation JSON supplying the classes");
  parse->add_option("--templates", templates, "Template library (YAML or JSON)");

  auto* stats = app.add_subcommand("stats", "Distribution report for a manifest");
  stats->add_option("--manifest", manifest, "Manifest JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  set_warning_sink([](std::string_view msg) { std::cerr << "warning: " << msg << "\n"; });
  try {
    if (*synth) cmd_synth(spec_file, synth_seed, out);
    else if (*gen) cmd_gen(gen_args, g);
    else if (*check) cmd_check(scene_file, anno_file, asset_file, sidecar, prompt, constraints, templates, t, yaw, g);
    else if (*eval) cmd_eval(manifest, submission, data, metrics_out, g);
    else if (*solve) cmd_solve(manifest, data, out, order, solve_seed, g);
    else if (*render) cmd_prompt_render(constraints, templates, render_seed);
    else if (*parse) cmd_prompt_parse(text, vocab, anno_file, templates);
    else if (*stats) cmd_stats(manifest);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
