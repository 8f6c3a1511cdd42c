#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "mzlab/training.hpp"

namespace mzlab {

// Binary layout (all integers and doubles little-endian):
//
//   "MZLABCKP"                      8-byte magic
//   u32 version                     kCheckpointVersion
//   repeated section:
//     u32 name length, name bytes
//     u64 payload length, payload
//   final section named "end" with an empty payload
//
// Sections: "config" (config text), "progress" (iteration, seed), "model",
// "adam", "replay". Self-play and training random streams are derived from
// (seed, iteration), so those two fields pin every generator state.
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_checkpoint(const TrainingState& state);
TrainingState decode_checkpoint(const std::string& bytes);

// Writes through a temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const TrainingState& state);
TrainingState load_checkpoint(const std::filesystem::path& path);

}  // namespace mzlab
