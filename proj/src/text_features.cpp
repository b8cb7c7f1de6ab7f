#include "aidetect/text_features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "aidetect/error.hpp"

namespace aidetect {

namespace {

struct RankedEntry {
  std::string key;
  std::size_t freq;
};

// Descending frequency, ties lexicographic.
std::vector<std::string> rank(const std::unordered_map<std::string, std::size_t>& freq, std::size_t max_size,
                              std::size_t min_freq) {
  std::vector<RankedEntry> entries;
  entries.reserve(freq.size());
  for (const auto& [key, f] : freq) {
    if (f >= min_freq) entries.push_back({key, f});
  }
  std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    return a.freq != b.freq ? a.freq > b.freq : a.key < b.key;
  });
  if (entries.size() > max_size) entries.resize(max_size);
  std::vector<std::string> keys;
  keys.reserve(entries.size());
  for (auto& e : entries) keys.push_back(std::move(e.key));
  return keys;
}

std::string join(const Tokens& tokens, std::size_t begin, std::size_t n) {
  std::string out = tokens[begin];
  for (std::size_t k = 1; k < n; ++k) {
    out.push_back(' ');
    out += tokens[begin + k];
  }
  return out;
}

std::vector<std::string> vocab_column_names(const Vocabulary& vocab) { return vocab.tokens(); }

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::vector<Tokens> tokenize_corpus(const Corpus& corpus, const CleaningProfile& profile, Exec exec) {
  std::vector<Tokens> out(corpus.size());
  for_each_index(corpus.size(), exec, [&](std::size_t i) { out[i] = tokenize(clean_text(corpus[i].text, profile)); });
  return out;
}

// --- Vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> tokens, CleaningProfile profile)
    : tokens_(std::move(tokens)), profile_(std::move(profile)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i) + 2).second) {
      throw Error(ErrorKind::DuplicateId, "vocabulary token '" + tokens_[i] + "' repeated");
    }
  }
}

int Vocabulary::lookup(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kOov : it->second;
}

std::string Vocabulary::fingerprint() const {
  std::uint64_t h = fnv1a64(profile_.name);
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  return hex64(h);
}

Vocabulary build_vocabulary(const std::vector<Tokens>& docs, const CleaningProfile& profile, std::size_t max_size,
                            std::size_t min_freq) {
  if (max_size < 1) throw Error(ErrorKind::EmptyVocabulary, "max_size must be at least 1");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : docs) {
    for (const auto& t : doc) ++freq[t];
  }
  auto tokens = rank(freq, max_size, min_freq);
  if (tokens.empty()) throw Error(ErrorKind::EmptyVocabulary, "no token reaches min_freq " + std::to_string(min_freq));
  return Vocabulary(std::move(tokens), profile);
}

Vocabulary build_vocabulary(const Corpus& corpus, const CleaningProfile& profile, std::size_t max_size,
                            std::size_t min_freq) {
  return build_vocabulary(tokenize_corpus(corpus, profile), profile, max_size, min_freq);
}

std::vector<int> encode_sequence(const Tokens& tokens, const Vocabulary& vocab, std::size_t max_len) {
  std::vector<int> seq(max_len, Vocabulary::kPad);
  const std::size_t n = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < n; ++i) seq[i] = vocab.lookup(tokens[i]);
  return seq;
}

// --- BoW / TF-IDF ----------------------------------------------------------

FeatureMatrix bag_of_words(const std::vector<Tokens>& docs, const Vocabulary& vocab, Exec exec) {
  FeatureMatrix m{Tensor2(docs.size(), vocab.size()), vocab_column_names(vocab), vocab.fingerprint()};
  for_each_index(docs.size(), exec, [&](std::size_t d) {
    auto row = m.data.row(d);
    for (const auto& t : docs[d]) {
      const int idx = vocab.lookup(t);
      if (idx >= 2) row[static_cast<std::size_t>(idx - 2)] += 1.0;
    }
  });
  return m;
}

FeatureMatrix bag_of_words(const Corpus& corpus, const Vocabulary& vocab, Exec exec) {
  return bag_of_words(tokenize_corpus(corpus, vocab.profile(), exec), vocab, exec);
}

std::vector<double> fit_idf(const std::vector<Tokens>& docs, const Vocabulary& vocab) {
  if (docs.empty()) throw Error(ErrorKind::EmptyTrainingSet, "tf-idf needs at least one document");
  std::vector<std::size_t> df(vocab.size(), 0);
  std::vector<char> seen(vocab.size(), 0);
  for (const auto& doc : docs) {
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& t : doc) {
      const int idx = vocab.lookup(t);
      if (idx >= 2 && !seen[static_cast<std::size_t>(idx - 2)]) {
        seen[static_cast<std::size_t>(idx - 2)] = 1;
        ++df[static_cast<std::size_t>(idx - 2)];
      }
    }
  }
  const double n = static_cast<double>(docs.size());
  std::vector<double> idf(vocab.size());
  for (std::size_t j = 0; j < idf.size(); ++j) {
    idf[j] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[j]))) + 1.0;
  }
  return idf;
}

FeatureMatrix tfidf_transform(const std::vector<Tokens>& docs, const Vocabulary& vocab, std::span<const double> idf,
                              Exec exec) {
  if (idf.size() != vocab.size()) throw Error(ErrorKind::WidthMismatch, "idf length differs from vocabulary size");
  FeatureMatrix m = bag_of_words(docs, vocab, exec);
  for_each_index(m.rows(), exec, [&](std::size_t d) {
    auto row = m.data.row(d);
    double sq = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] *= idf[j];
      sq += row[j] * row[j];
    }
    if (sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (double& v : row) v /= norm;
    }
  });
  return m;
}

TfidfResult tfidf(const std::vector<Tokens>& docs, const Vocabulary& vocab, Exec exec) {
  auto idf = fit_idf(docs, vocab);
  auto m = tfidf_transform(docs, vocab, idf, exec);
  return {std::move(m), std::move(idf)};
}

TfidfResult tfidf(const Corpus& corpus, const Vocabulary& vocab, Exec exec) {
  return tfidf(tokenize_corpus(corpus, vocab.profile(), exec), vocab, exec);
}

// --- n-grams ---------------------------------------------------------------

NgramExtraction extract_ngrams(const Tokens& tokens, std::size_t n_min, std::size_t n_max) {
  if (n_min < 1 || n_min > n_max) throw Error(ErrorKind::ShapeMismatch, "n-gram range must satisfy 1 <= n_min <= n_max");
  NgramExtraction out;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    if (tokens.size() < n) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      out.ngrams.push_back(join(tokens, i, n));
      ++out.counts[out.ngrams.back()];
    }
  }
  return out;
}

NgramVocabulary::NgramVocabulary(std::size_t n_min, std::size_t n_max, std::size_t min_freq,
                                 std::vector<std::string> ngrams, CleaningProfile profile)
    : n_min_(n_min), n_max_(n_max), min_freq_(min_freq), ngrams_(std::move(ngrams)), profile_(std::move(profile)) {
  if (n_min_ < 1 || n_min_ > n_max_ || n_max_ > 4) {
    throw Error(ErrorKind::ShapeMismatch, "n-gram range must satisfy 1 <= n_min <= n_max <= 4");
  }
  index_.reserve(ngrams_.size());
  for (std::size_t i = 0; i < ngrams_.size(); ++i) {
    if (!index_.emplace(ngrams_[i], static_cast<long>(i)).second) {
      throw Error(ErrorKind::DuplicateId, "n-gram '" + ngrams_[i] + "' repeated");
    }
  }
}

long NgramVocabulary::column(const std::string& ngram) const {
  const auto it = index_.find(ngram);
  return it == index_.end() ? -1 : it->second;
}

NgramVocabulary build_ngram_vocabulary(const std::vector<Tokens>& docs, const CleaningProfile& profile,
                                       std::size_t n_min, std::size_t n_max, std::size_t max_features,
                                       std::size_t min_freq) {
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : docs) {
    const auto ex = extract_ngrams(doc, n_min, n_max);
    for (const auto& [g, c] : ex.counts) freq[g] += c;
  }
  auto grams = rank(freq, max_features, min_freq);
  if (grams.empty()) throw Error(ErrorKind::EmptyVocabulary, "no n-gram reaches min_freq " + std::to_string(min_freq));
  return NgramVocabulary(n_min, n_max, min_freq, std::move(grams), profile);
}

FeatureMatrix ngram_features(const std::vector<Tokens>& docs, const NgramVocabulary& nvocab, Exec exec) {
  std::uint64_t h = fnv1a64(nvocab.profile().name);
  for (const auto& g : nvocab.ngrams()) h = fnv1a64(g, h);
  FeatureMatrix m{Tensor2(docs.size(), nvocab.size()), nvocab.ngrams(), hex64(h)};
  for_each_index(docs.size(), exec, [&](std::size_t d) {
    auto row = m.data.row(d);
    const auto ex = extract_ngrams(docs[d], nvocab.n_min(), nvocab.n_max());
    for (const auto& [g, c] : ex.counts) {
      const long col = nvocab.column(g);
      if (col >= 0) row[static_cast<std::size_t>(col)] = static_cast<double>(c);
    }
  });
  return m;
}

FeatureMatrix ngram_features(const Corpus& corpus, const NgramVocabulary& nvocab, Exec exec) {
  return ngram_features(tokenize_corpus(corpus, nvocab.profile(), exec), nvocab, exec);
}

// --- scaling / concatenation -----------------------------------------------

ScalerStats fit_scaler(const FeatureMatrix& train) {
  const std::size_t rows = train.rows();
  const std::size_t cols = train.cols();
  ScalerStats s{std::vector<double>(cols, 0.0), std::vector<double>(cols, 0.0), {}};
  if (rows == 0) throw Error(ErrorKind::EmptyTrainingSet, "cannot fit a scaler on zero rows");
  for (std::size_t j = 0; j < cols; ++j) {
    double sum = 0.0;
    bool constant = true;
    const double first = train.data(0, j);
    for (std::size_t i = 0; i < rows; ++i) {
      sum += train.data(i, j);
      constant = constant && train.data(i, j) == first;
    }
    const double mean = sum / static_cast<double>(rows);
    s.mean[j] = constant ? first : mean;
    if (constant) {
      s.std[j] = 0.0;
      s.constant_columns.push_back(j);
      continue;
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const double d = train.data(i, j) - mean;
      sq += d * d;
    }
    s.std[j] = std::sqrt(sq / static_cast<double>(rows));
  }
  return s;
}

FeatureMatrix apply_scaler(const FeatureMatrix& m, const ScalerStats& stats, Exec exec) {
  if (m.cols() != stats.mean.size() || m.cols() != stats.std.size()) {
    throw Error(ErrorKind::WidthMismatch, "matrix has " + std::to_string(m.cols()) + " columns, scaler expects " +
                                              std::to_string(stats.mean.size()));
  }
  FeatureMatrix out = m;
  for_each_index(out.rows(), exec, [&](std::size_t i) {
    auto row = out.data.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double divisor = stats.std[j] > 0.0 ? stats.std[j] : 1.0;
      row[j] = (row[j] - stats.mean[j]) / divisor;
    }
  });
  return out;
}

FeatureMatrix concat_features(std::span<const FeaturePart> parts) {
  if (parts.empty()) return {};
  const std::size_t rows = parts.front().matrix.rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.matrix.rows() != rows) {
      throw Error(ErrorKind::RowMismatch, "part '" + std::string(p.name) + "' has " + std::to_string(p.matrix.rows()) +
                                              " rows, expected " + std::to_string(rows));
    }
    cols += p.matrix.cols();
  }
  FeatureMatrix out{Tensor2(rows, cols), {}, {}};
  out.column_names.reserve(cols);
  std::uint64_t h = fnv1a64("concat");
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t j = 0; j < p.matrix.cols(); ++j) {
      const std::string col = j < p.matrix.column_names.size() ? p.matrix.column_names[j] : std::to_string(j);
      out.column_names.push_back(std::string(p.name) + ":" + col);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      const auto src = p.matrix.data.row(i);
      std::copy(src.begin(), src.end(), out.data.row(i).begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += p.matrix.cols();
    h = fnv1a64(p.matrix.fitted_on, h);
  }
  out.fitted_on = hex64(h);
  return out;
}

}  // namespace aidetect
