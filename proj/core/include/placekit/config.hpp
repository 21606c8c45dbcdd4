#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace placekit {

enum class BetweenMode { kIom, kLine };

// Every tolerance used by the checkers, the plausibility grid and the mask
// generator. Defaults are the published rule parameters; lengths are in
// meters and angles in degrees.
struct ThresholdConfig {
  double near_room_fraction = 0.01;
  double adjacent_tol = 0.03;
  double vertical_iom_min = 0.5;
  double on_gap_tol = 0.01;
  double above_below_min_gap = 0.01;
  double between_iom_min = 0.5;
  double between_overlap_max = 0.3;
  double between_anchor_max_dist = 1.5;
  double facing_max_dist = 2.0;
  double facing_half_angle = 30.0;
  double facing_lateral_iom_min = 0.5;
  double support_gap_tol = 0.01;
  double heightmap_range_tol = 0.10;
  double vis_fov = 60.0;
  int vis_res_bench = 256;
  int vis_res_dataset = 64;

  // Engine parameters without a published value.
  double cell_size = 0.025;
  // Grid cells within this distance of the projected asset count as
  // covered by it. Cells touching the outline are always covered.
  double footprint_margin = 0.0;
  int max_layers = 8;
  BetweenMode between_mode = BetweenMode::kIom;
  // Line mode: largest distance from the asset center to the segment
  // joining the anchor centers.
  double between_line_tol = 0.25;
  std::vector<std::string> visibility_classes{"tv", "door", "window"};
};

// Throws ValidationError when a value is non-positive, an angle lies
// outside (0, 90) degrees (FOV: (0, 180)), or a resolution is < 1.
void validate(const ThresholdConfig& cfg);

// JSON with one key per field; missing keys keep their default and
// unknown keys are rejected with a ValidationError.
std::string config_to_json(const ThresholdConfig& cfg);
ThresholdConfig config_from_json(std::string_view text);
ThresholdConfig load_config(const std::filesystem::path& file);

constexpr double deg_to_rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }

}  // namespace placekit
