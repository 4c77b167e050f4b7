#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <cstdint>

#include "motionid/replay.hpp"

namespace motionid {

// Adapter for the public Beat Saber Open Replay layout (magic 0x442D3D69,
// version byte 1, then tagged sections: 0 info, 1 frames, 2 notes, 3 walls,
// 4 heights, 5 pauses, ...).
inline constexpr std::uint32_t kBsorMagic = 0x442D3D69u;
inline constexpr std::uint8_t kBsorVersion = 1;

struct BsorImport {
  Replay replay;
  std::size_t dropped_events = 0;    // misses and bombs, which carry no cut data
  std::size_t skipped_sections = 0;  // walls, heights, pauses, unknown trailers
};

BsorImport import_bsor(std::span<const std::uint8_t> bytes);
BsorImport import_bsor(std::istream& source);

}  // namespace motionid
