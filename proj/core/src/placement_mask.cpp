#include "placekit/placement_mask.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <nlohmann/json.hpp>

#include "placekit/errors.hpp"
#include "placekit/ply.hpp"

namespace placekit {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'M', 'K'};

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <class T>
T get_le(std::string_view bytes, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(static_cast<std::uint8_t>(bytes[at + i])) << (8 * i);
  return v;
}

std::filesystem::path descriptor_path(const std::filesystem::path& file) {
  std::filesystem::path p = file;
  p.replace_extension(".json");
  return p;
}

}  // namespace

std::size_t PlacementMask::valid_count() const {
  return static_cast<std::size_t>(std::count_if(validity.begin(), validity.end(), [](std::uint8_t v) { return v != 0; }));
}

void validate(const PlacementMask& mask) {
  if (mask.rotations.size() != mask.validity.size())
    throw ValidationError("mask validity and rotation arrays differ in length");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.validity[i] > 1) throw ValidationError("mask validity byte must be 0 or 1");
    if ((mask.validity[i] != 0) != (mask.rotations[i] != 0))
      throw ValidationError("point " + std::to_string(i) + " breaks the validity/rotation invariant");
  }
}

std::string encode_mask(const PlacementMask& mask) {
  validate(mask);
  std::string out(kMagic, 4);
  put_le<std::uint16_t>(out, kMaskFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(mask.size()));
  out.append(reinterpret_cast<const char*>(mask.validity.data()), mask.size());
  out.append(reinterpret_cast<const char*>(mask.rotations.data()), mask.size());
  return out;
}

PlacementMask decode_mask(std::string_view bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ParseError("not a PLMK mask file", 0);
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kMaskFormatVersion) throw ParseError("unsupported mask version " + std::to_string(version), 4, 2);
  const auto n = get_le<std::uint32_t>(bytes, 6);
  if (bytes.size() != 10 + 2 * static_cast<std::size_t>(n))
    throw ParseError("mask file length does not match its point count", 6, 4);
  PlacementMask mask;
  mask.validity.assign(bytes.begin() + 10, bytes.begin() + 10 + n);
  mask.rotations.assign(bytes.begin() + 10 + n, bytes.end());
  try {
    validate(mask);
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 10);
  }
  return mask;
}

std::string mask_descriptor_json(const PlacementMask& mask, std::string_view mask_file) {
  const nlohmann::json j{{"format", "PLMK"},
                         {"version", kMaskFormatVersion},
                         {"mask_file", std::string(mask_file)},
                         {"points", mask.size()},
                         {"valid_points", mask.valid_count()},
                         {"scene_id", mask.scene_id},
                         {"asset_id", mask.asset_id},
                         {"prompt_hash", mask.prompt_hash}};
  return j.dump(2) + "\n";
}

void write_mask(const std::filesystem::path& file, const PlacementMask& mask) {
  write_file(file, encode_mask(mask));
  write_file(descriptor_path(file), mask_descriptor_json(mask, file.filename().string()));
}

PlacementMask read_mask(const std::filesystem::path& file) {
  PlacementMask mask = decode_mask(read_file(file));
  const auto desc = descriptor_path(file);
  if (std::filesystem::exists(desc)) {
    try {
      const auto j = nlohmann::json::parse(read_file(desc));
      mask.scene_id = j.value("scene_id", "");
      mask.asset_id = j.value("asset_id", "");
      mask.prompt_hash = j.value("prompt_hash", "");
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("invalid mask descriptor " + desc.string() + ": " + e.what());
    }
  }
  return mask;
}

}  // namespace placekit
