#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aidetect/detector.hpp"

namespace aidetect {

inline constexpr int kContainerFormatVersion = 1;

/// JSON text of a detector. Weights are base64 little-endian 32-bit floats;
/// vocabularies, idf and scaler statistics are stored exactly. The `created`
/// field comes from SOURCE_DATE_EPOCH (default 0) so output is reproducible.
std::string container_to_json(const Detector& detector);
/// Throws BadContainer on malformed input or shape inconsistencies.
Detector container_from_json(std::string_view text);

void save_container(const std::filesystem::path& path, const Detector& detector);
Detector load_container(const std::filesystem::path& path);

/// Rounds every weight through float, matching what a saved container holds.
void round_weights(Detector& detector);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace aidetect
