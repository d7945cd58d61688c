#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "eadgen/model.hpp"

namespace eadgen {

// Single-file model format, little-endian regardless of host:
//   magic "EADG", u32 version,
//   u64 header length + JSON header (seed, model config, vocabularies,
//   free-form config echo),
//   u64 parameter count, then per parameter: name, shape, raw f64 data.
// The layout is documented in the README.

struct Checkpoint {
  std::unique_ptr<GeneratorModel> model;
  std::uint64_t seed = 0;
  std::string config_echo;  // JSON as given to save_checkpoint
};

void save_checkpoint(const std::string& path, const GeneratorModel& model,
                     const std::string& config_echo = "");

// Throws DataError on unreadable, truncated or version-mismatched files.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace eadgen
