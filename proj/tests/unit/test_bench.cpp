#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "placekit/bench.hpp"
#include "placekit/random.hpp"

namespace placekit {
namespace {

using testing::box_on;
using testing::box_scene;
using testing::Item;

constexpr double kPi = 3.14159265358979323846;
const ThresholdConfig kCfg{};

SceneModel office(const std::string& id = "office", double density = 20.0) {
  return box_scene(id,
                   {Item{"table", box_on(1, 1, {0.9, 0.6, 0.75})},
                    Item{"chair", box_on(2.2, 1, {0.45, 0.45, 0.9})},
                    Item{"tv", box_on(2, 3.6, {1.0, 0.1, 0.6}, 0.5)},
                    Item{"bed", box_on(3.1, 2.6, {1.4, 2.0, 0.5})}},
                   4.0, density);
}

TEST(Manifest, ConstraintJsonRoundtrip) {
  const std::vector<Constraint> cs{Constraint::plausible(), Constraint::unary(Relation::kOn, {"desk", 3}),
                                   Constraint::between({"chair", {}}, {"coffee table", 7})};
  EXPECT_EQ(parse_constraints_json(constraints_json(cs)), cs);
  EXPECT_THROW(parse_constraints_json(R"([{"relation": "hovering", "anchors": []}])"), ValidationError);
  EXPECT_THROW(parse_constraints_json(R"([{"relation": "near", "anchors": []}])"), ValidationError);
  EXPECT_THROW(parse_constraints_json("[{"), ParseError);
}

TEST(Manifest, FileRoundtrip) {
  const auto dir = testing::fresh_dir("manifest");
  std::vector<BenchmarkExample> exs;
  for (int i = 0; i < 3; ++i)
    exs.push_back({"ex" + std::to_string(i), "s", "a", "Place the asset near the tv",
                   {Constraint::unary(Relation::kNear, {"tv", {}})}, i ? "masks/ex.plmk" : ""});
  write_manifest(dir / "m.jsonl", exs);
  EXPECT_EQ(read_manifest(dir / "m.jsonl"), exs);
  EXPECT_EQ(parse_example_line(example_json_line(exs[1])), exs[1]);
  EXPECT_THROW(read_manifest(dir / "missing.jsonl"), IoError);
  EXPECT_THROW(parse_example_line(R"({"example_id": "x"})"), ValidationError);
}

TEST(Manifest, SubmissionRoundtrip) {
  const auto dir = testing::fresh_dir("submission");
  const std::vector<Prediction> preds{{"a", {{1.5, 2.25, 0.125}, 0.5}}, {"b", {{-1, 0, 3}, -2.0}}};
  std::ofstream(dir / "s.jsonl") << submission_jsonl(preds);
  EXPECT_EQ(read_submission(dir / "s.jsonl"), preds);
}

TEST(Quotas, LargestRemainder) {
  EXPECT_EQ(largest_remainder({900, 1871, 637, 92}, 350), (std::vector<long>{90, 187, 64, 9}));
  EXPECT_EQ(largest_remainder({4208, 1503, 1210}, 692), (std::vector<long>{421, 150, 121}));
  EXPECT_EQ(largest_remainder({1, 1, 1}, 4), (std::vector<long>{2, 1, 1}));
  EXPECT_EQ(largest_remainder({1, 0}, 5), (std::vector<long>{5, 0}));
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> w(1 + rng.below(6));
    for (double& x : w) x = rng.uniform(0.1, 10);
    const long total = static_cast<long>(rng.below(1000));
    const auto q = largest_remainder(w, total);
    ASSERT_EQ(std::accumulate(q.begin(), q.end(), 0L), total);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_LT(std::abs(q[i] - total * w[i] / sum), 1.0);
  }
}

TEST(Corpus, SaveLoadRoundtrip) {
  const auto dir = testing::fresh_dir("corpus");
  Corpus c;
  c.add(office());
  c.add(make_box_asset("crate", {0.3, 0.4, 0.2}));
  save_corpus(c, dir);
  const Corpus back = load_corpus(dir);
  ASSERT_TRUE(back.has_scene("office"));
  ASSERT_TRUE(back.has_asset("crate"));
  EXPECT_EQ(back.scene("office").points(), c.scene("office").points());
  EXPECT_EQ(back.scene("office").anchors().size(), 4u);
  EXPECT_EQ(back.asset("crate").extents(), c.asset("crate").extents());
  EXPECT_THROW(back.scene("nope"), LookupError);
}

class EvalTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus.add(office());
    corpus.add(make_box_asset("box", {0.3, 0.3, 0.3}));
  }
  Corpus corpus;
  // Table footprint ends at x = 1.45; a 0.3 box centered at x = 1.62 leaves a 2 cm gap.
  const Placement beside_table{{1.62, 1.0, 0.15}, kPi / 2};
  const Placement beside_turned{{1.62, 1.0, 0.15}, -kPi / 2};
};

TEST_F(EvalTest, SingleFacingFailure) {
  const std::vector<BenchmarkExample> exs{
      {"e0", "office", "box", "", {Constraint::unary(Relation::kAdjacent, {"table", {}}),
                                   Constraint::unary(Relation::kFacing, {"table", {}})}, ""}};
  const MetricsReport ok = evaluate_submission(exs, {{"e0", beside_table}}, corpus, kCfg);
  EXPECT_EQ(ok.global_constraint_accuracy, (Ratio{3, 3}));
  EXPECT_EQ(ok.complete_placement_success, (Ratio{1, 1}));

  const MetricsReport m = evaluate_submission(exs, {{"e0", beside_turned}}, corpus, kCfg);
  EXPECT_EQ(m.global_constraint_accuracy, (Ratio{2, 3}));
  EXPECT_EQ(m.complete_placement_success, (Ratio{0, 1}));
  EXPECT_EQ(m.language_adherence_success, (Ratio{0, 1}));
  EXPECT_EQ(m.group_accuracy[0], (Ratio{1, 1}));
  EXPECT_EQ(m.group_accuracy[1], (Ratio{1, 1}));
  EXPECT_EQ(m.group_accuracy[2], (Ratio{0, 1}));
  EXPECT_EQ(m.group_accuracy[3], (Ratio{0, 0}));
  EXPECT_TRUE(std::isnan(m.group_accuracy[3].percent()));
  EXPECT_NEAR(m.global_constraint_accuracy.percent(), 200.0 / 3.0, 1e-12);
  const auto j = nlohmann::json::parse(metrics_json(m));
  EXPECT_TRUE(j["groups"]["visibility"]["percent"].is_null());
  EXPECT_EQ(j["global_constraint_accuracy"]["satisfied"], 2);
}

TEST_F(EvalTest, PhysicalFailureKeepsLanguage) {
  // Sunk 10 cm into the floor: adjacency still holds by box rules.
  const std::vector<BenchmarkExample> exs{
      {"e0", "office", "box", "", {Constraint::unary(Relation::kAdjacent, {"table", {}})}, ""}};
  const Placement sunk{{1.62, 1.0, 0.05}, 0.0};
  const MetricsReport m = evaluate_submission(exs, {{"e0", sunk}}, corpus, kCfg);
  EXPECT_EQ(m.group_accuracy[0], (Ratio{0, 1}));
  EXPECT_EQ(m.language_adherence_success, (Ratio{1, 1}));
  EXPECT_EQ(m.complete_placement_success, (Ratio{0, 1}));
}

TEST_F(EvalTest, MissingSceneScoresUnsatisfied) {
  const std::vector<BenchmarkExample> exs{
      {"e0", "gone", "box", "", {Constraint::unary(Relation::kNear, {"table", {}})}, ""},
      {"e1", "office", "box", "", {Constraint::unary(Relation::kNear, {"piano", {}})}, ""}};
  const MetricsReport m = evaluate_submission(exs, {{"e1", beside_table}, {"e0", beside_table}}, corpus, kCfg);
  EXPECT_EQ(m.global_constraint_accuracy, (Ratio{0, 4}));
  EXPECT_FALSE(m.examples[0].error.empty());
  EXPECT_FALSE(m.examples[1].error.empty());
}

TEST_F(EvalTest, CoverageErrors) {
  const std::vector<BenchmarkExample> exs{{"e0", "office", "box", "", {}, ""}};
  EXPECT_THROW(evaluate_submission(exs, {}, corpus, kCfg), ValidationError);
  EXPECT_THROW(evaluate_submission(exs, {{"other", beside_table}}, corpus, kCfg), ValidationError);
  EXPECT_THROW(evaluate_submission({exs[0], {"e1", "office", "box", "", {}, ""}},
                                   {{"e0", beside_table}, {"e0", beside_table}}, corpus, kCfg),
               ValidationError);
}

TEST_F(EvalTest, PermutationInvariantAndJobIndependent) {
  std::vector<BenchmarkExample> exs;
  std::vector<Prediction> preds;
  Rng rng(5);
  const Relation rels[] = {Relation::kNear, Relation::kAdjacent, Relation::kFacing, Relation::kOn};
  for (int i = 0; i < 20; ++i) {
    const std::string id = "e" + std::to_string(i);
    exs.push_back({id, "office", "box", "", {Constraint::unary(rels[i % 4], {"table", {}})}, ""});
    preds.push_back({id, {{rng.uniform(0.2, 3.8), rng.uniform(0.2, 3.8), 0.15}, rng.uniform(-kPi, kPi)}});
  }
  const MetricsReport a = evaluate_submission(exs, preds, corpus, kCfg, 1);
  std::reverse(preds.begin(), preds.end());
  const MetricsReport b = evaluate_submission(exs, preds, corpus, kCfg, 4);
  EXPECT_EQ(metrics_json(a), metrics_json(b));
}

TEST_F(EvalTest, BaselineSolvesAndFails) {
  const SceneModel& scene = corpus.scene("office");
  const Asset& asset = corpus.asset("box");
  for (const CandidateOrder order : {CandidateOrder::kDistanceToInvalid, CandidateOrder::kCenterOut, CandidateOrder::kRandom}) {
    BaselineOptions opt;
    opt.order = order;
    const std::vector<Constraint> cs{Constraint::unary(Relation::kNear, {"bed", {}})};
    const Placement p = solve_baseline(scene, asset, cs, kCfg, opt);
    EXPECT_TRUE(evaluate_prompt(scene, asset, p, cs, kCfg).complete_ok);
  }
  const Placement p = solve_baseline(scene, asset, {Constraint::plausible()}, kCfg);
  EXPECT_TRUE(check_physical(scene, asset, p, kCfg));
  EXPECT_THROW(solve_baseline(scene, asset,
                              {Constraint::unary(Relation::kOn, {"table", {}}),
                               Constraint::unary(Relation::kBelow, {"bed", {}})},
                              kCfg),
               NoSolutionError);
}

TEST(Extract, ArgmaxAndLift) {
  const Asset asset = make_box_asset("box", {0.2, 0.2, 0.4});
  PointCloud points;
  points.positions = {{0, 0, 0}, {1, 2, 0.5}, {3, 3, 0}};
  points.colors.resize(3);
  ScoredMask s;
  s.location = {0.1, 0.9, 0.9};
  s.rotation.assign(3, {});
  s.rotation[1][3] = 1.0;
  const Placement p = extract_placement(s, asset, points);
  EXPECT_EQ(p.t, (Vec3{1, 2, 0.7}));
  EXPECT_NEAR(p.yaw, 3 * kPi / 4, 1e-12);

  s.location[1] = std::nan("");
  s.rotation[2] = {-1, -1, -1, -1, -1, -1, -1, -1};
  EXPECT_EQ(extract_placement(s, asset, points).yaw, 0.0);
  EXPECT_EQ(extract_placement(s, asset, points).t, (Vec3{3, 3, 0.2}));

  s.rotation[2].fill(-INFINITY);
  EXPECT_THROW(extract_placement(s, asset, points), ValidationError);
  s.location.assign(3, -INFINITY);
  EXPECT_THROW(extract_placement(s, asset, points), ValidationError);
  s.location.resize(2);
  EXPECT_THROW(extract_placement(s, asset, points), ValidationError);
}

TEST(Generate, SmallDatasetIsConsistent) {
  Corpus corpus;
  corpus.add(office());
  corpus.add(make_box_asset("box", {0.3, 0.3, 0.3}));
  GenConfig gen;
  gen.examples = 10;
  const auto dir = testing::fresh_dir("gen");
  const GenerationReport r = generate_dataset(corpus, gen, kCfg, default_templates(), 11, dir);
  EXPECT_EQ(r.requested, 10);
  EXPECT_EQ(r.emitted + static_cast<int>(r.failed.size()), 10);
  const auto exs = read_manifest(dir / "manifest.jsonl");
  ASSERT_EQ(static_cast<int>(exs.size()), r.emitted);
  if (r.failed.empty()) {
    const auto counts = largest_remainder({900, 1871, 637, 92}, 10);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(r.count_histogram[k], counts[k]);
  }
  const SceneModel& scene = corpus.scene("office");
  for (const BenchmarkExample& ex : exs) {
    EXPECT_EQ(parse_prompt(ex.prompt, default_templates(), scene.vocabulary()), ex.constraints);
    ASSERT_FALSE(ex.mask_file.empty());
    const PlacementMask mask = read_mask(dir / ex.mask_file);
    EXPECT_EQ(mask.prompt_hash, prompt_hash(ex.prompt));
    bool any = false;
    for (std::size_t n = 0; n < mask.size(); ++n) any = any || mask.valid(n);
    EXPECT_TRUE(any) << ex.example_id;
    const Verification v = verify_prompt(scene, corpus.asset("box"), ex.constraints, kCfg);
    EXPECT_EQ(v.mask.validity, mask.validity);
    EXPECT_EQ(v.mask.rotations, mask.rotations);
  }
  const auto again = testing::fresh_dir("gen_again");
  generate_dataset(corpus, gen, kCfg, default_templates(), 11, again, 3);
  std::ifstream a(dir / "manifest.jsonl"), b(again / "manifest.jsonl");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
}

}  // namespace
}  // namespace placekit
