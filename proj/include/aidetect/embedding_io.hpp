#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aidetect/corpus.hpp"
#include "aidetect/numerics.hpp"

namespace aidetect {

/// Pooled encoder vectors keyed by document id.
struct EmbeddingSet {
  std::string model_id;
  std::uint32_t dim = 0;
  std::vector<std::string> ids;
  std::vector<float> vectors;  // ids.size() x dim, row-major

  std::size_t count() const noexcept { return ids.size(); }
  std::span<const float> vector(std::size_t i) const { return {vectors.data() + i * dim, dim}; }

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

inline constexpr std::uint32_t kEmbxVersion = 1;

/// EMBX v1, little-endian:
///   "EMBX" | u32 version | u32 len + model_id | u32 dim | u64 count
///   | count x (u32 len + id | dim x f32) | u32 CRC-32 of everything before it
std::vector<std::uint8_t> encode_embx(const EmbeddingSet& set);
/// Throws BadMagic, VersionUnsupported, Truncated, TrailingBytes,
/// ChecksumMismatch, NonFiniteVector, DuplicateId.
EmbeddingSet decode_embx(std::span<const std::uint8_t> bytes);

EmbeddingSet read_embx(const std::filesystem::path& path);
void write_embx(const EmbeddingSet& set, const std::filesystem::path& path);

/// Checks the set invariants (unique ids, dim > 0, row count, finiteness).
void validate(const EmbeddingSet& set);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

/// Rows in corpus document order, widened to double. Throws MissingId naming
/// the first absent document.
Tensor2 align(const Corpus& corpus, const EmbeddingSet& set);
Tensor2 align(std::span<const std::string> doc_ids, const EmbeddingSet& set);

}  // namespace aidetect
