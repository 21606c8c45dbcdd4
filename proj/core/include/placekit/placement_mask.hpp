#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace placekit {

inline constexpr std::uint16_t kMaskFormatVersion = 1;

// Per-point placement validity plus 8 rotation-bin bits. A point is valid
// exactly when at least one of its rotation bits is set.
struct PlacementMask {
  std::vector<std::uint8_t> validity;
  std::vector<std::uint8_t> rotations;
  std::string scene_id;
  std::string asset_id;
  std::string prompt_hash;

  static PlacementMask empty(std::size_t n) { return {std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0), {}, {}, {}}; }
  static PlacementMask full(std::size_t n) { return {std::vector<std::uint8_t>(n, 1), std::vector<std::uint8_t>(n, 0xFF), {}, {}, {}}; }

  std::size_t size() const { return validity.size(); }
  bool valid(std::size_t i) const { return validity[i] != 0; }
  std::uint8_t bits(std::size_t i) const { return rotations[i]; }
  // Sets the rotation bits and derives validity from them.
  void set(std::size_t i, std::uint8_t bits) {
    rotations[i] = bits;
    validity[i] = bits != 0;
  }
  std::size_t valid_count() const;

  friend bool operator==(const PlacementMask&, const PlacementMask&) = default;
};

// Throws ValidationError on length mismatches or a broken validity /
// rotation invariant.
void validate(const PlacementMask& mask);

// "PLMK", u16 version, u32 N, N validity bytes, N rotation bytes; all
// little-endian. Identifiers live in the JSON descriptor.
std::string encode_mask(const PlacementMask& mask);
PlacementMask decode_mask(std::string_view bytes);

std::string mask_descriptor_json(const PlacementMask& mask, std::string_view mask_file);

// Writes `file` and its descriptor (same stem, ".json"). Reading picks up
// the descriptor when it exists.
void write_mask(const std::filesystem::path& file, const PlacementMask& mask);
PlacementMask read_mask(const std::filesystem::path& file);

}  // namespace placekit
