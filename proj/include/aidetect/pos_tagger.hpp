#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aidetect/corpus.hpp"
#include "aidetect/kernels.hpp"
#include "aidetect/text_features.hpp"

namespace aidetect {

/// Coarse universal tag set; the enumerator order is the feature order.
enum class PosTag : std::uint8_t { NOUN, VERB, ADJ, ADV, PRON, DET, ADP, NUM, CONJ, PRT, PUNCT, X };

inline constexpr std::size_t kPosTagCount = 12;
inline constexpr std::array<std::string_view, kPosTagCount> kPosTagNames = {
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PRT", "PUNCT", "X"};

std::string_view to_string(PosTag tag);

/// Version line of the bundled tag lexicon (recorded in model containers).
std::string_view pos_lexicon_version();
std::size_t pos_lexicon_size();

/// Deterministic rule tagger: closed-class lexicon, then numeric/punctuation/
/// symbol checks, then suffix rules, then NOUN.
PosTag pos_tag(std::string_view token);
std::vector<PosTag> pos_tag(const Tokens& tokens);

/// Relative frequency of each tag; all zeros for empty input.
std::array<double, kPosTagCount> pos_feature_vector(std::span<const PosTag> tags);

/// One 12-column row of tag frequencies per document.
FeatureMatrix pos_features(const std::vector<Tokens>& docs, Exec exec = Exec::Parallel);

}  // namespace aidetect
