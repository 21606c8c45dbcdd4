#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "placekit/config.hpp"
#include "placekit/constraints.hpp"
#include "placekit/errors.hpp"
#include "placekit/masks.hpp"
#include "placekit/prompts.hpp"
#include "placekit/scene.hpp"

namespace placekit {

inline constexpr std::string_view kManifestVersion = "1";

struct BenchmarkExample {
  std::string example_id;
  std::string scene_id;
  std::string asset_id;
  std::string prompt;
  std::vector<Constraint> constraints;
  std::string mask_file;  // relative to the manifest directory; may be empty
  friend bool operator==(const BenchmarkExample&, const BenchmarkExample&) = default;
};

// Constraint lists as JSON arrays of {"relation", "anchors": [{"class", "id"?}]}.
std::string constraints_json(const std::vector<Constraint>& constraints);
std::vector<Constraint> parse_constraints_json(std::string_view text);

// JSON-lines manifest, one example per line.
std::string example_json_line(const BenchmarkExample& ex);
BenchmarkExample parse_example_line(std::string_view line);
std::vector<BenchmarkExample> read_manifest(const std::filesystem::path& file);
void write_manifest(const std::filesystem::path& file, const std::vector<BenchmarkExample>& examples);

struct Prediction {
  std::string example_id;
  Placement placement;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// JSON-lines submission: {"example_id", "t": [x, y, z], "yaw"}.
std::vector<Prediction> read_submission(const std::filesystem::path& file);
std::string submission_jsonl(const std::vector<Prediction>& predictions);

// Scenes and assets by id. On disk: <dir>/scenes/<id>.ply + <id>.json and
// <dir>/assets/<id>.ply + <id>.json.
class Corpus {
 public:
  void add(SceneModel scene);
  void add(Asset asset);
  // Throw LookupError for unknown ids.
  const SceneModel& scene(const std::string& id) const;
  const Asset& asset(const std::string& id) const;
  bool has_scene(const std::string& id) const { return scenes_.count(id) > 0; }
  bool has_asset(const std::string& id) const { return assets_.count(id) > 0; }
  const std::map<std::string, SceneModel>& scenes() const { return scenes_; }
  const std::map<std::string, Asset>& assets() const { return assets_; }

 private:
  std::map<std::string, SceneModel> scenes_;
  std::map<std::string, Asset> assets_;
};

// Loads every scene and asset the examples reference. Missing files are
// skipped; the evaluator scores their examples as unsatisfied.
Corpus load_corpus(const std::filesystem::path& dir, const std::vector<BenchmarkExample>& examples);
// Loads everything under the directory.
Corpus load_corpus(const std::filesystem::path& dir);
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Dataset generation.

struct GenConfig {
  int examples = 10;
  // Weights of 1, 2, 3 and 4 constraints per example, and of the spatial,
  // rotational and visibility groups. Emitted counts follow them exactly
  // (largest-remainder quotas).
  std::array<double, 4> count_weights{900, 1871, 637, 92};
  std::array<double, 3> group_weights{4208, 1503, 1210};
  // Attempts per example before it is reported as failed. Each attempt
  // builds the constraint set one group at a time, keeping a drawn
  // constraint only if the combined mask stays non-empty.
  int retry_budget = 40;
};

// Integer quotas proportional to `weights` summing to `total`; remainders go
// to the largest fractional parts, ties to the lower index.
std::vector<long> largest_remainder(const std::vector<double>& weights, long total);

struct GenerationReport {
  int requested = 0;
  int emitted = 0;
  std::vector<std::string> failed;  // example ids without a satisfiable prompt
  std::array<long, 4> count_histogram{};
  std::array<long, 3> group_histogram{};
};

std::string generation_report_json(const GenerationReport& report);

// Writes <out>/manifest.jsonl, <out>/masks/<example_id>.plmk (+ .json) and
// <out>/report.json. Example i uses the (scene, asset) pairs in round-robin
// order starting at pair i, moving to the next pair every few failed
// attempts. The output does not depend on `jobs`.
GenerationReport generate_dataset(const Corpus& corpus, const GenConfig& gen, const ThresholdConfig& cfg,
                                  const TemplateLibrary& lib, std::uint64_t seed,
                                  const std::filesystem::path& out_dir, int jobs = 1);

// ---------------------------------------------------------------------------
// Evaluation.

// Exact rational count.
struct Ratio {
  long num = 0;
  long den = 0;
  // NaN when den == 0.
  double percent() const;
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct ExampleVerdict {
  std::string example_id;
  ValidityReport report;
  std::string error;  // set when the example could not be checked
};

struct MetricsReport {
  Ratio global_constraint_accuracy;
  Ratio complete_placement_success;
  Ratio language_adherence_success;
  // physical, spatial, rotational, visibility
  std::array<Ratio, 4> group_accuracy;
  std::vector<ExampleVerdict> examples;
};

// Scores each example with evaluate_prompt in benchmark-exact mode.
// Physical plausibility counts once per example. An example whose check
// fails (missing scene, unknown anchor) is scored as all-unsatisfied.
// Throws ValidationError unless the predictions cover the examples one to
// one.
MetricsReport evaluate_submission(const std::vector<BenchmarkExample>& examples,
                                  const std::vector<Prediction>& predictions, const Corpus& corpus,
                                  const ThresholdConfig& cfg, int jobs = 1);

std::string metrics_json(const MetricsReport& report);

// ---------------------------------------------------------------------------
// Baseline and inference extraction.

enum class CandidateOrder { kDistanceToInvalid, kCenterOut, kRandom };

struct BaselineOptions {
  CandidateOrder order = CandidateOrder::kDistanceToInvalid;
  std::uint64_t seed = 0;  // kRandom only
  // Exact verifications tried before giving up.
  int max_candidates = 4096;
};

class NoSolutionError : public Error {
 public:
  using Error::Error;
};

// Candidates are the valid (point, bin) pairs of the combined mask, in the
// configured order (bins ascending within a point). The first candidate
// whose lifted placement passes every benchmark-exact check is returned.
// Throws NoSolutionError when the mask is empty or no candidate passes.
Placement solve_baseline(const SceneModel& scene, const Asset& asset,
                         const std::vector<Constraint>& constraints, const ThresholdConfig& cfg,
                         const BaselineOptions& options = {}, const PlacementMask* physical = nullptr);

struct ScoredMask {
  std::vector<double> location;                 // per point
  std::vector<std::array<double, 8>> rotation;  // per point and bin
};

// Point with the largest finite location score (ties: lowest index), yaw
// at the center of its best finite rotation bin (ties: lowest bin), lifted
// by half the asset height. Throws ValidationError for size mismatches or
// when no finite score exists.
Placement extract_placement(const ScoredMask& scored, const Asset& asset, const PointCloud& points);

}  // namespace placekit
