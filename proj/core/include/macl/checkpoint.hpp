#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "macl/config.hpp"
#include "macl/encoder.hpp"

namespace macl {

inline constexpr int kCheckpointVersion = 1;

/// Textual JSON container: format tag, version, encoder spec, parameters as
/// shortest round-trip decimal doubles, config echo and final epoch.
struct Checkpoint {
  Encoder encoder;
  WorkbenchConfig config;
  std::size_t final_epoch = 0;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace macl
