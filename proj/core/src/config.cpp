#include "placekit/config.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "placekit/errors.hpp"
#include "placekit/ply.hpp"

namespace placekit {

using nlohmann::json;

namespace {

template <class Fn>
void for_each_number(ThresholdConfig& c, Fn&& fn) {
  fn("near_room_fraction", c.near_room_fraction);
  fn("adjacent_tol", c.adjacent_tol);
  fn("vertical_iom_min", c.vertical_iom_min);
  fn("on_gap_tol", c.on_gap_tol);
  fn("above_below_min_gap", c.above_below_min_gap);
  fn("between_iom_min", c.between_iom_min);
  fn("between_overlap_max", c.between_overlap_max);
  fn("between_anchor_max_dist", c.between_anchor_max_dist);
  fn("facing_max_dist", c.facing_max_dist);
  fn("facing_half_angle", c.facing_half_angle);
  fn("facing_lateral_iom_min", c.facing_lateral_iom_min);
  fn("support_gap_tol", c.support_gap_tol);
  fn("heightmap_range_tol", c.heightmap_range_tol);
  fn("vis_fov", c.vis_fov);
  fn("cell_size", c.cell_size);
  fn("footprint_margin", c.footprint_margin);
  fn("between_line_tol", c.between_line_tol);
}

template <class Fn>
void for_each_int(ThresholdConfig& c, Fn&& fn) {
  fn("vis_res_bench", c.vis_res_bench);
  fn("vis_res_dataset", c.vis_res_dataset);
  fn("max_layers", c.max_layers);
}

}  // namespace

void validate(const ThresholdConfig& cfg) {
  ThresholdConfig copy = cfg;
  for_each_number(copy, [](const char* name, double v) {
    if (!std::isfinite(v) || v < 0.0 || (v == 0.0 && std::string_view(name) != "footprint_margin"))
      throw ValidationError(std::string("config value ") + name + " must be positive");
  });
  for_each_int(copy, [](const char* name, int v) {
    if (v < 1) throw ValidationError(std::string("config value ") + name + " must be at least 1");
  });
  if (cfg.facing_half_angle >= 90.0) throw ValidationError("facing_half_angle must be below 90 degrees");
  if (cfg.vis_fov >= 180.0) throw ValidationError("vis_fov must be below 180 degrees");
  for (const double r : {cfg.vertical_iom_min, cfg.between_iom_min, cfg.between_overlap_max,
                         cfg.facing_lateral_iom_min})
    if (r > 1.0) throw ValidationError("IoM thresholds must not exceed 1");
}

std::string config_to_json(const ThresholdConfig& cfg) {
  ThresholdConfig copy = cfg;
  json j = json::object();
  for_each_number(copy, [&](const char* name, double v) { j[name] = v; });
  for_each_int(copy, [&](const char* name, int v) { j[name] = v; });
  j["between_mode"] = cfg.between_mode == BetweenMode::kIom ? "iom" : "line";
  j["visibility_classes"] = cfg.visibility_classes;
  return j.dump(2) + "\n";
}

ThresholdConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config JSON: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  ThresholdConfig cfg;
  std::size_t used = 0;
  try {
    for_each_number(cfg, [&](const char* name, double& v) {
      if (j.contains(name)) {
        v = j[name].get<double>();
        ++used;
      }
    });
    for_each_int(cfg, [&](const char* name, int& v) {
      if (j.contains(name)) {
        v = j[name].get<int>();
        ++used;
      }
    });
    if (j.contains("between_mode")) {
      const auto mode = j["between_mode"].get<std::string>();
      if (mode == "iom") {
        cfg.between_mode = BetweenMode::kIom;
      } else if (mode == "line") {
        cfg.between_mode = BetweenMode::kLine;
      } else {
        throw ValidationError("between_mode must be \"iom\" or \"line\"");
      }
      ++used;
    }
    if (j.contains("visibility_classes")) {
      cfg.visibility_classes = j["visibility_classes"].get<std::vector<std::string>>();
      ++used;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }
  if (used != j.size()) {
    const json known = json::parse(config_to_json(ThresholdConfig{}));
    for (const auto& [key, value] : j.items())
      if (!known.contains(key)) throw ValidationError("unknown config key \"" + key + "\"");
  }
  validate(cfg);
  return cfg;
}

ThresholdConfig load_config(const std::filesystem::path& file) { return config_from_json(read_file(file)); }

}  // namespace placekit
