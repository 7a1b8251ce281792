#pragma once

#include "socsrl/agents.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace socsrl {

inline constexpr std::string_view kCheckpointMagic = "SOCSRL-CKPT-v1";

struct PopulationCheckpoint {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string population;  // "treatment" or "baseline"
  std::vector<Agent> agents;
};

// File layout:
//   line 1: magic
//   line 2: compact JSON header (metadata, per-agent layouts, value count)
//   rest:   little-endian IEEE-754 doubles, per agent encoder then decoder
//           parameters in ParamVector order
void write_checkpoint(const std::filesystem::path& path, const PopulationCheckpoint& ckpt);

/// Throws VersionError on a wrong magic line, FormatError on anything else.
/// Optimizer moments are not persisted; loaded agents get fresh Adam state.
PopulationCheckpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace socsrl
