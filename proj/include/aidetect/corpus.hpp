#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace aidetect {

enum class ClassLabel : std::uint8_t { Human = 0, AI = 1 };

inline int to_int(ClassLabel label) { return static_cast<int>(label); }
const char* to_string(ClassLabel label);
/// Accepts `0`, `1`, `Human`, `AI` (case-insensitive).
std::optional<ClassLabel> parse_label(std::string_view text);

enum class SplitTag { Train, Valid, Test };
const char* to_string(SplitTag tag);
std::optional<SplitTag> parse_split(std::string_view text);

struct LabeledDocument {
  std::string id;
  std::string text;
  ClassLabel label = ClassLabel::Human;
  std::optional<SplitTag> split;

  friend bool operator==(const LabeledDocument&, const LabeledDocument&) = default;
};

/// Ordered, id-unique collection of labeled documents.
class Corpus {
 public:
  Corpus() = default;

  /// Throws DuplicateId when the id is already present.
  void add(LabeledDocument doc);

  const std::vector<LabeledDocument>& documents() const noexcept { return docs_; }
  const LabeledDocument& operator[](std::size_t i) const { return docs_[i]; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }
  std::size_t count(ClassLabel label) const noexcept { return counts_[to_int(label)]; }
  bool contains(const std::string& id) const { return ids_.contains(id); }

  /// Rows dropped at load time for missing or empty text.
  std::size_t dropped() const noexcept { return dropped_; }
  void set_dropped(std::size_t n) noexcept { dropped_ = n; }

  std::vector<int> labels() const;
  /// FNV-1a over ids, labels and texts; identifies the corpus a fitted
  /// vocabulary or scaler came from.
  std::string fingerprint() const;

  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.docs_ == b.docs_; }

 private:
  std::vector<LabeledDocument> docs_;
  std::unordered_set<std::string> ids_;
  std::array<std::size_t, 2> counts_{0, 0};
  std::size_t dropped_ = 0;
};

enum class CorpusFormat { Csv, Jsonl };
std::optional<CorpusFormat> parse_format(std::string_view text);
/// Picks the format from the file extension (.jsonl/.json -> Jsonl, else Csv).
CorpusFormat format_from_path(const std::filesystem::path& path);

Corpus read_corpus(std::istream& in, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus, CorpusFormat format);

/// Writes one CSV field, quoting only when it holds a comma, quote or newline.
void write_csv_field(std::ostream& out, std::string_view field);

struct CleaningProfile {
  std::string name = "custom";
  bool lowercase = false;
  bool strip_punctuation = false;
  bool remove_digits = false;
  bool collapse_whitespace = false;

  /// lowercase, strip punctuation, collapse whitespace; digits kept.
  static CleaningProfile classic();
  /// lowercase, drop digits, replace every non-letter with space, collapse.
  static CleaningProfile lstm();
  /// Same transforms as classic.
  static CleaningProfile head();
  static std::optional<CleaningProfile> by_name(std::string_view name);

  friend bool operator==(const CleaningProfile&, const CleaningProfile&) = default;
};

/// Applies the enabled transforms in order: lowercase, digit removal,
/// punctuation removal (replaced by a space), whitespace collapse, trim.
/// Idempotent for every profile.
std::string clean_text(std::string_view text, const CleaningProfile& profile);

/// Stratified split: for each label, shuffle that label's documents with the
/// seeded Rng and send floor(train_frac * class size) to the first part.
/// Both parts keep corpus order.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_frac, std::uint64_t seed);

}  // namespace aidetect
