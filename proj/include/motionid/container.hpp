#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "motionid/replay.hpp"

namespace motionid {

// MIDR1: little-endian replay container.
//   "MIDR1" | u16 version | metadata (u32 count, {u32 len, key, u32 len, value}*)
//   | u64 frame count, {f64 time, 21 x f32}* | u64 event count,
//   {f64 time, 5 x u8, 16 x f32}*
inline constexpr std::uint16_t kContainerVersion = 1;

enum class ContainerErrc { bad_magic, truncated, version_mismatch, nan_pose, invalid_record };

class ContainerError : public Error {
 public:
  ContainerError(ContainerErrc code, const std::string& message)
      : Error("replay_store", message), code_(code) {}
  ContainerErrc code() const noexcept { return code_; }

 private:
  ContainerErrc code_;
};

std::vector<std::uint8_t> encode_container(const Replay& replay);
// Validates first; nothing is written when the replay is rejected.
std::size_t write_container(const Replay& replay, std::ostream& sink);

Replay decode_container(std::span<const std::uint8_t> bytes);
Replay read_container(std::istream& source);

Replay load_replay_file(const std::string& path);
void save_replay_file(const Replay& replay, const std::string& path);

}  // namespace motionid
