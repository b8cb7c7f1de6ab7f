#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aidetect/corpus.hpp"
#include "aidetect/kernels.hpp"
#include "aidetect/numerics.hpp"

namespace aidetect {

using Tokens = std::vector<std::string>;

/// Splits cleaned text on runs of whitespace.
Tokens tokenize(std::string_view text);

/// Cleans and tokenizes every document, preserving corpus order.
std::vector<Tokens> tokenize_corpus(const Corpus& corpus, const CleaningProfile& profile,
                                    Exec exec = Exec::Parallel);

/// Frequency-ranked token index. Index 0 is padding and 1 is out-of-vocabulary;
/// real tokens occupy 2..size()+1 ordered by descending corpus frequency, ties
/// broken lexicographically.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kOov = 1;

  Vocabulary() = default;
  /// Tokens listed in index order (first gets index 2).
  Vocabulary(std::vector<std::string> tokens, CleaningProfile profile);

  int lookup(const std::string& token) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const CleaningProfile& profile() const noexcept { return profile_; }
  std::string fingerprint() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.profile_ == b.profile_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  CleaningProfile profile_;
};

/// Keeps up to `max_size` tokens with frequency >= `min_freq`.
/// Throws EmptyVocabulary when no token qualifies.
Vocabulary build_vocabulary(const std::vector<Tokens>& docs, const CleaningProfile& profile,
                            std::size_t max_size, std::size_t min_freq);
Vocabulary build_vocabulary(const Corpus& corpus, const CleaningProfile& profile, std::size_t max_size,
                            std::size_t min_freq);

/// Maps tokens to indices (unknown -> 1), keeps the first max_len, right-pads
/// with 0.
std::vector<int> encode_sequence(const Tokens& tokens, const Vocabulary& vocab, std::size_t max_len);

struct FeatureMatrix {
  Tensor2 data;
  std::vector<std::string> column_names;
  std::string fitted_on;

  std::size_t rows() const noexcept { return data.rows(); }
  std::size_t cols() const noexcept { return data.cols(); }
};

/// Raw token counts; column j is vocabulary index j+2.
FeatureMatrix bag_of_words(const std::vector<Tokens>& docs, const Vocabulary& vocab, Exec exec = Exec::Parallel);
FeatureMatrix bag_of_words(const Corpus& corpus, const Vocabulary& vocab, Exec exec = Exec::Parallel);

/// Smoothed idf: ln((1+N)/(1+df)) + 1.
std::vector<double> fit_idf(const std::vector<Tokens>& docs, const Vocabulary& vocab);
/// tf * idf with raw counts as tf, rows L2-normalized (zero rows stay zero).
FeatureMatrix tfidf_transform(const std::vector<Tokens>& docs, const Vocabulary& vocab,
                              std::span<const double> idf, Exec exec = Exec::Parallel);

struct TfidfResult {
  FeatureMatrix matrix;
  std::vector<double> idf;
};
TfidfResult tfidf(const std::vector<Tokens>& docs, const Vocabulary& vocab, Exec exec = Exec::Parallel);
TfidfResult tfidf(const Corpus& corpus, const Vocabulary& vocab, Exec exec = Exec::Parallel);

/// An n-gram is its tokens joined by single spaces.
struct NgramExtraction {
  std::vector<std::string> ngrams;            // grouped by n ascending, document order within each n
  std::map<std::string, std::size_t> counts;  // frequency of each n-gram
};

NgramExtraction extract_ngrams(const Tokens& tokens, std::size_t n_min, std::size_t n_max);

/// Column-indexed n-gram vocabulary (columns ordered by descending frequency,
/// ties lexicographic).
class NgramVocabulary {
 public:
  NgramVocabulary() = default;
  NgramVocabulary(std::size_t n_min, std::size_t n_max, std::size_t min_freq, std::vector<std::string> ngrams,
                  CleaningProfile profile);

  std::size_t n_min() const noexcept { return n_min_; }
  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t min_freq() const noexcept { return min_freq_; }
  std::size_t size() const noexcept { return ngrams_.size(); }
  const std::vector<std::string>& ngrams() const noexcept { return ngrams_; }
  const CleaningProfile& profile() const noexcept { return profile_; }
  /// Column index or -1.
  long column(const std::string& ngram) const;

  friend bool operator==(const NgramVocabulary& a, const NgramVocabulary& b) {
    return a.n_min_ == b.n_min_ && a.n_max_ == b.n_max_ && a.min_freq_ == b.min_freq_ && a.ngrams_ == b.ngrams_ &&
           a.profile_ == b.profile_;
  }

 private:
  std::size_t n_min_ = 1;
  std::size_t n_max_ = 1;
  std::size_t min_freq_ = 1;
  std::vector<std::string> ngrams_;
  std::unordered_map<std::string, long> index_;
  CleaningProfile profile_;
};

/// Throws EmptyVocabulary when nothing reaches min_freq.
NgramVocabulary build_ngram_vocabulary(const std::vector<Tokens>& docs, const CleaningProfile& profile,
                                       std::size_t n_min, std::size_t n_max, std::size_t max_features,
                                       std::size_t min_freq);

FeatureMatrix ngram_features(const std::vector<Tokens>& docs, const NgramVocabulary& nvocab,
                             Exec exec = Exec::Parallel);
FeatureMatrix ngram_features(const Corpus& corpus, const NgramVocabulary& nvocab, Exec exec = Exec::Parallel);

/// Population mean/std per column of the training matrix.
struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<std::size_t> constant_columns;

  friend bool operator==(const ScalerStats&, const ScalerStats&) = default;
};

ScalerStats fit_scaler(const FeatureMatrix& train);
/// z = (x - mean) / std, with divisor 1 on constant columns. Throws WidthMismatch.
FeatureMatrix apply_scaler(const FeatureMatrix& m, const ScalerStats& stats, Exec exec = Exec::Parallel);

struct FeaturePart {
  std::string_view name;
  const FeatureMatrix& matrix;
};

/// Horizontal concatenation in part order; column names become "name:column".
/// Throws RowMismatch.
FeatureMatrix concat_features(std::span<const FeaturePart> parts);

}  // namespace aidetect
