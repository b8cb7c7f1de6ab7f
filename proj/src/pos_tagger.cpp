#include "aidetect/pos_tagger.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_map>

#include "aidetect/error.hpp"

namespace aidetect {

namespace detail {
extern const std::string_view kTagLexiconTsv;
}

namespace {

std::optional<PosTag> parse_tag(std::string_view name) {
  for (std::size_t i = 0; i < kPosTagCount; ++i) {
    if (kPosTagNames[i] == name) return static_cast<PosTag>(i);
  }
  return std::nullopt;
}

struct Lexicon {
  std::unordered_map<std::string, PosTag> entries;
  std::string version = "unversioned";
};

Lexicon parse_lexicon(std::string_view tsv) {
  Lexicon lex;
  std::size_t pos = 0;
  while (pos < tsv.size()) {
    std::size_t eol = tsv.find('\n', pos);
    if (eol == std::string_view::npos) eol = tsv.size();
    std::string_view line = tsv.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kVersion = "# version:";
      if (line.starts_with(kVersion)) {
        std::string_view v = line.substr(kVersion.size());
        while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
        lex.version = std::string(v);
      }
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error(ErrorKind::BadConfig, "tag lexicon line without tab");
    const auto tag = parse_tag(line.substr(tab + 1));
    if (!tag) throw Error(ErrorKind::BadConfig, "tag lexicon has unknown tag in line '" + std::string(line) + "'");
    lex.entries.emplace(std::string(line.substr(0, tab)), *tag);
  }
  return lex;
}

const Lexicon& lexicon() {
  static const Lexicon lex = parse_lexicon(detail::kTagLexiconTsv);
  return lex;
}

std::vector<UChar32> code_points(std::string_view s) {
  std::vector<UChar32> out;
  const auto* b = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  for (int32_t i = 0; i < n;) {
    UChar32 c;
    U8_NEXT(b, i, n, c);
    out.push_back(c < 0 ? 0xFFFD : c);
  }
  return out;
}

bool is_numeric_literal(const std::vector<UChar32>& cps) {
  bool digit = false;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const UChar32 c = cps[i];
    if (u_isdigit(c)) {
      digit = true;
    } else if (c == U'.' || c == U',' || ((c == U'-' || c == U'+') && i == 0)) {
      continue;
    } else {
      return false;
    }
  }
  return digit;
}

bool ends_with(std::string_view token, std::string_view suffix) {
  // The stem must keep at least two characters.
  return token.size() >= suffix.size() + 2 && token.ends_with(suffix);
}

struct SuffixRule {
  std::string_view suffix;
  PosTag tag;
};

// Checked in order; longer suffixes first where they overlap.
constexpr SuffixRule kSuffixRules[] = {
    {"ness", PosTag::NOUN}, {"ment", PosTag::NOUN}, {"tion", PosTag::NOUN}, {"sion", PosTag::NOUN},
    {"ity", PosTag::NOUN},  {"ly", PosTag::ADV},    {"ing", PosTag::VERB},  {"ized", PosTag::VERB},
    {"ised", PosTag::VERB}, {"izes", PosTag::VERB}, {"ises", PosTag::VERB}, {"ize", PosTag::VERB},
    {"ise", PosTag::VERB},  {"ify", PosTag::VERB},  {"ed", PosTag::VERB},   {"able", PosTag::ADJ},
    {"ible", PosTag::ADJ},  {"less", PosTag::ADJ},  {"ous", PosTag::ADJ},   {"ful", PosTag::ADJ},
    {"ive", PosTag::ADJ},   {"ical", PosTag::ADJ},  {"al", PosTag::ADJ},    {"ic", PosTag::ADJ},
};

}  // namespace

std::string_view to_string(PosTag tag) { return kPosTagNames[static_cast<std::size_t>(tag)]; }

std::string_view pos_lexicon_version() { return lexicon().version; }

std::size_t pos_lexicon_size() { return lexicon().entries.size(); }

PosTag pos_tag(std::string_view token) {
  if (token.empty()) return PosTag::X;
  std::string lower(token);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto& lex = lexicon();
  if (const auto it = lex.entries.find(lower); it != lex.entries.end()) return it->second;

  const auto cps = code_points(token);
  if (is_numeric_literal(cps)) return PosTag::NUM;
  if (std::all_of(cps.begin(), cps.end(), [](UChar32 c) { return u_ispunct(c) != 0; })) return PosTag::PUNCT;
  if (cps.size() == 1 && !u_isalnum(cps[0])) return PosTag::X;

  for (const auto& rule : kSuffixRules) {
    if (ends_with(lower, rule.suffix)) return rule.tag;
  }
  return PosTag::NOUN;
}

std::vector<PosTag> pos_tag(const Tokens& tokens) {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(pos_tag(t));
  return tags;
}

std::array<double, kPosTagCount> pos_feature_vector(std::span<const PosTag> tags) {
  std::array<double, kPosTagCount> freq{};
  if (tags.empty()) return freq;
  for (PosTag t : tags) freq[static_cast<std::size_t>(t)] += 1.0;
  const double n = static_cast<double>(tags.size());
  for (double& f : freq) f /= n;
  return freq;
}

FeatureMatrix pos_features(const std::vector<Tokens>& docs, Exec exec) {
  FeatureMatrix m{Tensor2(docs.size(), kPosTagCount), {}, "pos-lexicon-" + std::string(pos_lexicon_version())};
  for (auto name : kPosTagNames) m.column_names.emplace_back(name);
  for_each_index(docs.size(), exec, [&](std::size_t d) {
    const auto tags = pos_tag(docs[d]);
    const auto freq = pos_feature_vector(tags);
    std::copy(freq.begin(), freq.end(), m.data.row(d).begin());
  });
  return m;
}

}  // namespace aidetect
