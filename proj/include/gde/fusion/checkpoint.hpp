#pragma once

#include <string>
#include <utility>

#include "gde/fusion/model.hpp"

namespace gde::fusion {

/// Self-describing weight container:
///
///   bytes 0..7   magic "GDEWGT01"
///   bytes 8..11  uint32 little-endian JSON header length
///   then         the JSON header (dimensions, layer/head counts, mask
///                radius and mode, norm placement, array names + shapes)
///   then         float64 little-endian arrays, row-major, in header order
std::string checkpoint_bytes(const FusionConfig& cfg, const FusionWeights& weights);

std::pair<FusionConfig, FusionWeights> parse_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const FusionConfig& cfg,
                     const FusionWeights& weights);

std::pair<FusionConfig, FusionWeights> load_checkpoint(const std::string& path);

}  // namespace gde::fusion
