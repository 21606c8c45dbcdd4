#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "placekit/config.hpp"
#include "placekit/placement_mask.hpp"
#include "placekit/scene.hpp"

namespace placekit {

inline constexpr int kRotationBins = 8;

// Yaw at the center of rotation bin y (45 degrees per bin).
inline double bin_yaw(int bin) { return bin * (kTwoPi / kRotationBins); }
// Bin whose +-22.5 degree interval contains `yaw`.
int yaw_bin(double yaw);

// Layered heightmaps from a grid of vertical rays cast from above. Cell
// (i, j) is the ray through origin + ((i + 0.5), (j + 0.5)) * cell_size.
// Layer k of a cell holds its k-th lowest intersection height; cells with
// fewer intersections repeat their highest one. Each stored height also
// records whether it was a real intersection and whether the surface hit
// faces up.
class HeightmapStack {
 public:
  static constexpr double kNoHit = -std::numeric_limits<double>::infinity();

  HeightmapStack() = default;
  HeightmapStack(Vec2 origin, double cell_size, int width, int height, int layers);

  const Vec2& origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int layers() const { return layers_; }

  // kNoHit for cells without any intersection.
  double at(int i, int j, int layer) const { return heights_[index(i, j, layer)]; }
  bool real(int i, int j, int layer) const { return flags_[index(i, j, layer)] & kReal; }
  bool faces_up(int i, int j, int layer) const { return flags_[index(i, j, layer)] & kUp; }
  // Number of real intersections in the cell.
  int count(int i, int j) const { return counts_[static_cast<std::size_t>(j) * width_ + i]; }
  // An upward-facing surface with free space above it: the next real
  // intersection faces down, or there is none.
  bool support_candidate(int i, int j, int layer) const;
  // Height of the next real intersection above `layer`, +inf if none.
  double ceiling(int i, int j, int layer) const;

  Vec2 cell_center(int i, int j) const {
    return {origin_.x + (i + 0.5) * cell_size_, origin_.y + (j + 0.5) * cell_size_};
  }
  bool contains_cell(int i, int j) const { return i >= 0 && j >= 0 && i < width_ && j < height_; }
  // Cell containing (x, y); may lie outside the grid.
  std::pair<int, int> cell_of(double x, double y) const {
    return {static_cast<int>(std::floor((x - origin_.x) / cell_size_)),
            static_cast<int>(std::floor((y - origin_.y) / cell_size_))};
  }

  // Stores the sorted intersections of one cell (at most `layers`).
  struct Sample {
    double z;
    bool up;
  };
  void set_cell(int i, int j, const std::vector<Sample>& samples);

 private:
  static constexpr std::uint8_t kReal = 1;
  static constexpr std::uint8_t kUp = 2;
  std::size_t index(int i, int j, int layer) const {
    return (static_cast<std::size_t>(j) * width_ + i) * layers_ + layer;
  }

  Vec2 origin_;
  double cell_size_ = 0.025;
  int width_ = 0;
  int height_ = 0;
  int layers_ = 0;
  std::vector<double> heights_;
  std::vector<std::uint8_t> flags_;
  std::vector<std::uint8_t> counts_;
};

// Casts one downward ray per cell over the mesh bounding box. Duplicate
// hits on shared edges are merged; at equal heights upward-facing hits sort
// first. The layer count is the largest per-cell count, capped at
// `max_layers` (deeper cells keep their lowest hits and a warning is
// issued). Throws ValidationError for an empty mesh or cell_size <= 0.
HeightmapStack build_heightmap_stack(const IndexedMesh& mesh, double cell_size, int max_layers = 8,
                                     int jobs = 1);

// Sorted, de-duplicated downward-ray intersections through (x, y).
std::vector<HeightmapStack::Sample> column_samples(const IndexedMesh& mesh, double x, double y);

// Per-bin raster of the asset rotated to the bin center.
struct FootprintBin {
  double yaw = 0.0;
  // Tight raster anchored at the lower corner of the rotated bounding box;
  // a cell is occupied when the vertical line through its center meets the
  // asset, and `top` is the highest such hit above the asset bottom.
  int nx = 0;
  int ny = 0;
  Vec2 min_corner;  // relative to the asset center
  std::vector<std::uint8_t> occupied;
  std::vector<double> top;
  // Tight bounding box of the occupied cells, inclusive.
  int bbox_x0 = 0;
  int bbox_y0 = 0;
  int bbox_x1 = -1;
  int bbox_y1 = -1;

  // Scene-grid cells covered by the asset when its center sits at a cell
  // center: any cell whose square, grown by the footprint margin, overlaps
  // the projected asset. `height` bounds the asset top in that cell.
  struct Offset {
    int di;
    int dj;
    double height;
  };
  std::vector<Offset> kernel;

  bool occupied_at(int i, int j) const { return occupied[static_cast<std::size_t>(j) * nx + i]; }
  double top_at(int i, int j) const { return top[static_cast<std::size_t>(j) * nx + i]; }
};

struct AssetFootprint {
  double cell_size = 0.025;
  double margin = 0.0;
  double asset_height = 0.0;
  std::vector<FootprintBin> bins;  // kRotationBins entries
};

AssetFootprint compute_asset_footprints(const Asset& asset, double cell_size, double margin);
AssetFootprint compute_asset_footprints(const Asset& asset, const ThresholdConfig& cfg);

// Validity bits per (cell, layer); bit y is rotation bin y.
class PhysicalGrid {
 public:
  PhysicalGrid() = default;
  PhysicalGrid(int width, int height, int layers)
      : width_(width), height_(height), layers_(layers),
        bits_(static_cast<std::size_t>(width) * height * layers, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int layers() const { return layers_; }
  std::uint8_t bits(int i, int j, int layer) const { return bits_[index(i, j, layer)]; }
  void set_bits(int i, int j, int layer, std::uint8_t b) { bits_[index(i, j, layer)] = b; }
  bool valid(int i, int j, int layer, int bin) const { return (bits(i, j, layer) >> bin) & 1; }
  std::size_t valid_count() const;
  // Support height chosen for each valid (cell, layer); NaN elsewhere.
  double support(int i, int j, int layer) const { return support_[index(i, j, layer)]; }
  void set_support(int i, int j, int layer, double s) {
    if (support_.empty()) support_.assign(bits_.size(), std::numeric_limits<double>::quiet_NaN());
    support_[index(i, j, layer)] = s;
  }

 private:
  std::size_t index(int i, int j, int layer) const {
    return (static_cast<std::size_t>(j) * width_ + i) * layers_ + layer;
  }
  int width_ = 0;
  int height_ = 0;
  int layers_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<double> support_;
};

// For every support-candidate (cell, layer) and rotation bin: the asset
// centered on the cell, over the cells its kernel covers, must find in
// each covered column an upward surface no higher than the layer height
// plus heightmap_range_tol; the highest and lowest of those surfaces may
// differ by at most heightmap_range_tol; and resting on the highest one,
// the asset must stay below the next surface in every covered column.
PhysicalGrid compute_physical_grid(const HeightmapStack& stack, const AssetFootprint& fp,
                                   const ThresholdConfig& cfg, int jobs = 1);

// Each point takes the bits of the (cell, layer) holding it whose height is
// nearest to the point's z, provided it is within 2 * cell_size.
PlacementMask grid_to_point_mask(const PhysicalGrid& grid, const HeightmapStack& stack,
                                 const PointCloud& points);

// Debug output: one layer's heights as a 16-bit PGM (P5, heights mapped
// linearly between the stack minimum and maximum, 0 = no hit), and a CSV
// with one row per real (cell, layer).
void write_layer_pgm(const std::filesystem::path& file, const HeightmapStack& stack, int layer);
void write_validity_pgm(const std::filesystem::path& file, const PhysicalGrid& grid, int layer);
void write_grid_csv(const std::filesystem::path& file, const HeightmapStack& stack,
                    const PhysicalGrid& grid);

}  // namespace placekit
