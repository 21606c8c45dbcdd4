#include "placekit/plausibility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "placekit/errors.hpp"
#include "placekit/log.hpp"
#include "placekit/parallel.hpp"
#include "placekit/ply.hpp"

namespace placekit {

namespace {

constexpr double kHeightEps = 1e-9;

double hit_height(const TriangleMesh& mesh, std::uint32_t tri, const Hit& hit) {
  const auto& t = mesh.triangles[tri];
  const double z0 = mesh.vertices[t[0]].z;
  // Horizontal triangles report their exact height so coincident surfaces
  // compare equal.
  if (mesh.vertices[t[1]].z == z0 && mesh.vertices[t[2]].z == z0) return z0;
  return hit.point.z;
}

// Separating-axis overlap of a projected triangle with an axis-aligned
// rectangle; touching does not count.
bool triangle_overlaps_rect(const std::array<Vec2, 3>& tri, double x0, double y0, double x1, double y1) {
  constexpr double eps = 1e-12;
  const double tx0 = std::min({tri[0].x, tri[1].x, tri[2].x});
  const double tx1 = std::max({tri[0].x, tri[1].x, tri[2].x});
  const double ty0 = std::min({tri[0].y, tri[1].y, tri[2].y});
  const double ty1 = std::max({tri[0].y, tri[1].y, tri[2].y});
  if (tx1 <= x0 + eps || tx0 >= x1 - eps || ty1 <= y0 + eps || ty0 >= y1 - eps) return false;
  const std::array<Vec2, 4> rect{Vec2{x0, y0}, Vec2{x1, y0}, Vec2{x1, y1}, Vec2{x0, y1}};
  for (int e = 0; e < 3; ++e) {
    const Vec2 d = tri[(e + 1) % 3] - tri[e];
    const Vec2 axis{-d.y, d.x};
    if (norm(axis) < 1e-15) continue;
    double tmin = HUGE_VAL;
    double tmax = -HUGE_VAL;
    for (const Vec2& v : tri) {
      tmin = std::min(tmin, dot(axis, v));
      tmax = std::max(tmax, dot(axis, v));
    }
    double rmin = HUGE_VAL;
    double rmax = -HUGE_VAL;
    for (const Vec2& v : rect) {
      rmin = std::min(rmin, dot(axis, v));
      rmax = std::max(rmax, dot(axis, v));
    }
    const double scale = eps * norm(axis);
    if (tmax <= rmin + scale || rmax <= tmin + scale) return false;
  }
  return true;
}

}  // namespace

int yaw_bin(double yaw) {
  const double w = wrap_angle(yaw);
  const int b = static_cast<int>(std::floor((w + kPi / kRotationBins) / (kTwoPi / kRotationBins)));
  return b % kRotationBins;
}

HeightmapStack::HeightmapStack(Vec2 origin, double cell_size, int width, int height, int layers)
    : origin_(origin), cell_size_(cell_size), width_(width), height_(height), layers_(layers) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  heights_.assign(n * layers, kNoHit);
  flags_.assign(n * layers, 0);
  counts_.assign(n, 0);
}

void HeightmapStack::set_cell(int i, int j, const std::vector<Sample>& samples) {
  const int n = std::min<int>(static_cast<int>(samples.size()), layers_);
  counts_[static_cast<std::size_t>(j) * width_ + i] = static_cast<std::uint8_t>(n);
  for (int k = 0; k < layers_; ++k) {
    const std::size_t at = index(i, j, k);
    if (k < n) {
      heights_[at] = samples[k].z;
      flags_[at] = kReal | (samples[k].up ? kUp : 0);
    } else {
      heights_[at] = n > 0 ? samples[n - 1].z : kNoHit;
      flags_[at] = 0;
    }
  }
}

bool HeightmapStack::support_candidate(int i, int j, int layer) const {
  const int n = count(i, j);
  if (layer >= n || !faces_up(i, j, layer)) return false;
  return layer + 1 >= n || !faces_up(i, j, layer + 1);
}

double HeightmapStack::ceiling(int i, int j, int layer) const {
  return layer + 1 < count(i, j) ? at(i, j, layer + 1) : HUGE_VAL;
}

std::vector<HeightmapStack::Sample> column_samples(const IndexedMesh& mesh, double x, double y) {
  const Ray ray{{x, y, mesh.bounds().max.z + 1.0}, {0.0, 0.0, -1.0}};
  std::vector<HeightmapStack::Sample> samples;
  for (const Hit& h : raycast_all(mesh, ray)) {
    const double nz = mesh.normal(h.triangle).z;
    if (nz == 0.0) continue;
    samples.push_back({hit_height(mesh.mesh(), h.triangle, h), nz > 0.0});
  }
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    if (a.z != b.z) return a.z < b.z;
    return a.up && !b.up;
  });
  std::vector<HeightmapStack::Sample> merged;
  for (const auto& s : samples) {
    bool duplicate = false;
    for (auto it = merged.rbegin(); it != merged.rend() && s.z - it->z <= kHeightEps; ++it)
      if (it->up == s.up) {
        duplicate = true;
        break;
      }
    if (!duplicate) merged.push_back(s);
  }
  return merged;
}

HeightmapStack build_heightmap_stack(const IndexedMesh& mesh, double cell_size, int max_layers, int jobs) {
  if (!(cell_size > 0.0)) throw ValidationError("cell size must be positive");
  if (mesh.triangle_count() == 0 || mesh.bounds().empty()) throw ValidationError("cannot build a heightmap of an empty mesh");
  const Aabb b = mesh.bounds();
  const Vec2 origin{b.min.x, b.min.y};
  const int width = std::max(1, static_cast<int>(std::ceil((b.max.x - b.min.x) / cell_size - 1e-9)));
  const int height = std::max(1, static_cast<int>(std::ceil((b.max.y - b.min.y) / cell_size - 1e-9)));
  std::vector<std::vector<HeightmapStack::Sample>> columns(static_cast<std::size_t>(width) * height);
  parallel_for(static_cast<std::size_t>(height), jobs, [&](std::size_t j) {
    for (int i = 0; i < width; ++i)
      columns[j * width + i] =
          column_samples(mesh, origin.x + (i + 0.5) * cell_size, origin.y + (j + 0.5) * cell_size);
  });
  std::size_t deepest = 1;
  std::size_t truncated = 0;
  for (const auto& c : columns) {
    deepest = std::max(deepest, c.size());
    if (c.size() > static_cast<std::size_t>(max_layers)) ++truncated;
  }
  if (truncated > 0)
    warn("heightmap: " + std::to_string(truncated) + " columns have more than " + std::to_string(max_layers) +
         " intersections; upper ones are dropped");
  const int layers = static_cast<int>(std::min<std::size_t>(deepest, static_cast<std::size_t>(max_layers)));
  HeightmapStack stack(origin, cell_size, width, height, layers);
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) stack.set_cell(i, j, columns[static_cast<std::size_t>(j) * width + i]);
  return stack;
}

AssetFootprint compute_asset_footprints(const Asset& asset, double cell_size, double margin) {
  if (!(cell_size > 0.0) || !(margin >= 0.0)) throw ValidationError("invalid footprint cell size or margin");
  AssetFootprint fp;
  fp.cell_size = cell_size;
  fp.margin = margin;
  fp.asset_height = asset.height();
  const double bottom = -asset.height() / 2;
  const double c = cell_size;
  for (int y = 0; y < kRotationBins; ++y) {
    FootprintBin bin;
    bin.yaw = bin_yaw(y);
    TriangleMesh rotated = asset.mesh();
    for (Vec3& v : rotated.vertices) v = rotate_z(v, bin.yaw);
    const IndexedMesh indexed(rotated);
    const Aabb box = indexed.bounds();
    bin.min_corner = {box.min.x, box.min.y};
    bin.nx = std::max(1, static_cast<int>(std::ceil((box.max.x - box.min.x) / c - 1e-9)));
    bin.ny = std::max(1, static_cast<int>(std::ceil((box.max.y - box.min.y) / c - 1e-9)));
    bin.occupied.assign(static_cast<std::size_t>(bin.nx) * bin.ny, 0);
    bin.top.assign(bin.occupied.size(), 0.0);
    bin.bbox_x0 = bin.nx;
    bin.bbox_y0 = bin.ny;
    for (int j = 0; j < bin.ny; ++j) {
      for (int i = 0; i < bin.nx; ++i) {
        const auto samples =
            column_samples(indexed, box.min.x + (i + 0.5) * c, box.min.y + (j + 0.5) * c);
        if (samples.empty()) continue;
        const std::size_t at = static_cast<std::size_t>(j) * bin.nx + i;
        bin.occupied[at] = 1;
        bin.top[at] = samples.back().z - bottom;
        bin.bbox_x0 = std::min(bin.bbox_x0, i);
        bin.bbox_y0 = std::min(bin.bbox_y0, j);
        bin.bbox_x1 = std::max(bin.bbox_x1, i);
        bin.bbox_y1 = std::max(bin.bbox_y1, j);
      }
    }
    if (bin.bbox_x1 < 0) bin.bbox_x0 = bin.bbox_y0 = 0;

    // Coverage kernel from the projected triangles.
    const double reach = c / 2 + margin;
    const int i0 = static_cast<int>(std::floor((box.min.x - reach) / c)) - 1;
    const int i1 = static_cast<int>(std::ceil((box.max.x + reach) / c)) + 1;
    const int j0 = static_cast<int>(std::floor((box.min.y - reach) / c)) - 1;
    const int j1 = static_cast<int>(std::ceil((box.max.y + reach) / c)) + 1;
    const int kw = i1 - i0 + 1;
    std::vector<double> cover(static_cast<std::size_t>(kw) * (j1 - j0 + 1), -HUGE_VAL);
    for (std::size_t t = 0; t < rotated.triangles.size(); ++t) {
      const auto [a, b2, c3] = rotated.corners(t);
      if (triangle_area(a, b2, c3) < kDegenerateArea) continue;
      const std::array<Vec2, 3> tri{Vec2{a.x, a.y}, Vec2{b2.x, b2.y}, Vec2{c3.x, c3.y}};
      const double top = std::max({a.z, b2.z, c3.z}) - bottom;
      const double tx0 = std::min({a.x, b2.x, c3.x});
      const double tx1 = std::max({a.x, b2.x, c3.x});
      const double ty0 = std::min({a.y, b2.y, c3.y});
      const double ty1 = std::max({a.y, b2.y, c3.y});
      const int di0 = std::max(i0, static_cast<int>(std::floor((tx0 - reach) / c)));
      const int di1 = std::min(i1, static_cast<int>(std::ceil((tx1 + reach) / c)));
      const int dj0 = std::max(j0, static_cast<int>(std::floor((ty0 - reach) / c)));
      const int dj1 = std::min(j1, static_cast<int>(std::ceil((ty1 + reach) / c)));
      for (int dj = dj0; dj <= dj1; ++dj) {
        for (int di = di0; di <= di1; ++di) {
          double& slot = cover[static_cast<std::size_t>(dj - j0) * kw + (di - i0)];
          if (slot >= top) continue;
          if (triangle_overlaps_rect(tri, di * c - reach, dj * c - reach, di * c + reach, dj * c + reach))
            slot = top;
        }
      }
    }
    for (int dj = j0; dj <= j1; ++dj)
      for (int di = i0; di <= i1; ++di) {
        const double h = cover[static_cast<std::size_t>(dj - j0) * kw + (di - i0)];
        if (h > -HUGE_VAL) bin.kernel.push_back({di, dj, h});
      }
    fp.bins.push_back(std::move(bin));
  }
  return fp;
}

AssetFootprint compute_asset_footprints(const Asset& asset, const ThresholdConfig& cfg) {
  return compute_asset_footprints(asset, cfg.cell_size, cfg.footprint_margin);
}

std::size_t PhysicalGrid::valid_count() const {
  return static_cast<std::size_t>(std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

namespace {

// Union of all bin kernels with the largest height per offset. Passing the
// union test implies passing every bin.
std::vector<FootprintBin::Offset> union_kernel(const AssetFootprint& fp) {
  std::vector<FootprintBin::Offset> all;
  for (const FootprintBin& b : fp.bins) all.insert(all.end(), b.kernel.begin(), b.kernel.end());
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.dj != b.dj ? a.dj < b.dj : (a.di != b.di ? a.di < b.di : a.height > b.height);
  });
  std::vector<FootprintBin::Offset> out;
  for (const auto& o : all)
    if (out.empty() || out.back().di != o.di || out.back().dj != o.dj) out.push_back(o);
  return out;
}

struct PatchResult {
  bool valid = false;
  double support = 0.0;
};

PatchResult evaluate_patch(const HeightmapStack& stack, int i, int j, double h0,
                           const std::vector<FootprintBin::Offset>& kernel, double range_tol) {
  const double limit = h0 + range_tol + kHeightEps;
  double lo = HUGE_VAL;
  double hi = -HUGE_VAL;
  double fit = HUGE_VAL;
  for (const auto& o : kernel) {
    const int ci = i + o.di;
    const int cj = j + o.dj;
    if (!stack.contains_cell(ci, cj)) return {};
    int k = stack.count(ci, cj) - 1;
    while (k >= 0 && stack.at(ci, cj, k) > limit) --k;
    if (k < 0 || !stack.faces_up(ci, cj, k)) return {};
    const double z = stack.at(ci, cj, k);
    lo = std::min(lo, z);
    hi = std::max(hi, z);
    if (hi - lo > range_tol + kHeightEps) return {};
    fit = std::min(fit, stack.ceiling(ci, cj, k) - o.height);
    if (hi >= fit) return {};
  }
  if (kernel.empty() || !(hi < fit)) return {};
  return {true, hi};
}

}  // namespace

PhysicalGrid compute_physical_grid(const HeightmapStack& stack, const AssetFootprint& fp,
                                   const ThresholdConfig& cfg, int jobs) {
  if (std::abs(fp.cell_size - stack.cell_size()) > 1e-12)
    throw ValidationError("footprint and heightmap cell sizes differ");
  if (fp.bins.size() != kRotationBins) throw ValidationError("footprint needs 8 rotation bins");
  PhysicalGrid grid(stack.width(), stack.height(), stack.layers());
  const auto all = union_kernel(fp);
  int span_x = 0;
  int span_y = 0;
  for (const auto& o : all) {
    span_x = std::max(span_x, std::abs(o.di) * 2 + 1);
    span_y = std::max(span_y, std::abs(o.dj) * 2 + 1);
  }
  bool fits = false;
  for (const FootprintBin& b : fp.bins) {
    int bx = 0;
    int by = 0;
    for (const auto& o : b.kernel) {
      bx = std::max(bx, std::abs(o.di) * 2 + 1);
      by = std::max(by, std::abs(o.dj) * 2 + 1);
    }
    fits = fits || (bx <= stack.width() && by <= stack.height());
  }
  if (!fits) {
    warn("asset footprint is larger than the heightmap; no placement is valid");
    return grid;
  }
  std::vector<std::vector<std::pair<int, double>>> supports(static_cast<std::size_t>(stack.height()));
  parallel_for(static_cast<std::size_t>(stack.height()), jobs, [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < stack.width(); ++i) {
      for (int l = 0; l < stack.count(i, j); ++l) {
        if (!stack.support_candidate(i, j, l)) continue;
        const double h0 = stack.at(i, j, l);
        std::uint8_t bits = 0;
        double support = -HUGE_VAL;
        const PatchResult u = evaluate_patch(stack, i, j, h0, all, cfg.heightmap_range_tol);
        if (u.valid) {
          bits = 0xFF;
          support = u.support;
        } else {
          for (int y = 0; y < kRotationBins; ++y) {
            const PatchResult r = evaluate_patch(stack, i, j, h0, fp.bins[y].kernel, cfg.heightmap_range_tol);
            if (!r.valid) continue;
            bits |= static_cast<std::uint8_t>(1u << y);
            support = std::max(support, r.support);
          }
        }
        grid.set_bits(i, j, l, bits);
        if (bits) supports[row].emplace_back(i * stack.layers() + l, support);
      }
    }
  });
  for (int j = 0; j < stack.height(); ++j)
    for (const auto& [key, s] : supports[static_cast<std::size_t>(j)])
      grid.set_support(key / stack.layers(), j, key % stack.layers(), s);
  return grid;
}

PlacementMask grid_to_point_mask(const PhysicalGrid& grid, const HeightmapStack& stack,
                                 const PointCloud& points) {
  if (points.positions.empty()) throw ValidationError("point cloud is empty");
  PlacementMask mask = PlacementMask::empty(points.size());
  const double tol = 2.0 * stack.cell_size();
  for (std::size_t n = 0; n < points.size(); ++n) {
    const Vec3& p = points.positions[n];
    const auto [i, j] = stack.cell_of(p.x, p.y);
    if (!stack.contains_cell(i, j)) continue;
    int best = -1;
    double best_d = HUGE_VAL;
    for (int l = 0; l < stack.count(i, j); ++l) {
      const double d = std::abs(stack.at(i, j, l) - p.z);
      if (d <= tol && d < best_d) {
        best = l;
        best_d = d;
      }
    }
    if (best >= 0) mask.set(n, grid.bits(i, j, best));
  }
  return mask;
}

void write_layer_pgm(const std::filesystem::path& file, const HeightmapStack& stack, int layer) {
  double lo = HUGE_VAL;
  double hi = -HUGE_VAL;
  for (int j = 0; j < stack.height(); ++j)
    for (int i = 0; i < stack.width(); ++i)
      for (int l = 0; l < stack.count(i, j); ++l) {
        lo = std::min(lo, stack.at(i, j, l));
        hi = std::max(hi, stack.at(i, j, l));
      }
  const double span = hi > lo ? hi - lo : 1.0;
  std::string out = "P5\n" + std::to_string(stack.width()) + " " + std::to_string(stack.height()) + "\n65535\n";
  // Row 0 of the image is the largest y.
  for (int j = stack.height() - 1; j >= 0; --j)
    for (int i = 0; i < stack.width(); ++i) {
      unsigned v = 0;
      if (stack.count(i, j) > 0)
        v = 1 + static_cast<unsigned>(std::lround((stack.at(i, j, std::min(layer, stack.layers() - 1)) - lo) / span * 65534.0));
      out.push_back(static_cast<char>(v >> 8));
      out.push_back(static_cast<char>(v & 0xFF));
    }
  write_file(file, out);
}

void write_validity_pgm(const std::filesystem::path& file, const PhysicalGrid& grid, int layer) {
  std::string out = "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n8\n";
  for (int j = grid.height() - 1; j >= 0; --j)
    for (int i = 0; i < grid.width(); ++i)
      out.push_back(static_cast<char>(std::popcount(grid.bits(i, j, layer))));
  write_file(file, out);
}

void write_grid_csv(const std::filesystem::path& file, const HeightmapStack& stack, const PhysicalGrid& grid) {
  std::ostringstream out;
  out.precision(9);
  out << "i,j,layer,x,y,height,faces_up,candidate,bits\n";
  for (int j = 0; j < stack.height(); ++j)
    for (int i = 0; i < stack.width(); ++i)
      for (int l = 0; l < stack.count(i, j); ++l) {
        const Vec2 c = stack.cell_center(i, j);
        out << i << ',' << j << ',' << l << ',' << c.x << ',' << c.y << ',' << stack.at(i, j, l) << ','
            << stack.faces_up(i, j, l) << ',' << stack.support_candidate(i, j, l) << ','
            << int(grid.bits(i, j, l)) << '\n';
      }
  write_file(file, out.str());
}

}  // namespace placekit
