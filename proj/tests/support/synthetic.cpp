#include "synthetic.hpp"

#include <array>
#include <string_view>
#include <vector>

#include "aidetect/numerics.hpp"

namespace aidetect::testing {

namespace {

constexpr std::array<std::string_view, 16> kCommon = {"the", "a",    "of",  "and", "to",   "in",  "is",  "it",
                                                      "that", "was", "for", "on",  "with", "as",  "at",  "this"};

constexpr std::array<std::string_view, 24> kHuman = {
    "i",     "we",    "you",   "they",  "went",  "saw",   "said",  "got",   "told",   "guess", "yeah",  "kinda",
    "stuff", "folks", "mom",   "dad",   "walked", "ate",  "laughed", "cried", "home",  "dog",   "friend", "tired"};

constexpr std::array<std::string_view, 24> kAi = {
    "comprehensive", "additionally", "furthermore", "significantly", "crucial",    "innovative",
    "notably",       "essential",    "seamless",    "robust",        "enhancement", "utilization",
    "leverage",      "pivotal",      "multifaceted", "landscape",    "paramount",  "optimization",
    "effectively",   "dynamic",      "transformative", "holistic",   "strategic",  "implementation"};

constexpr std::array<std::string_view, 8> kToyHuman = {"apple", "river", "stone", "cloud",
                                                       "grass", "horse", "candle", "bread"};
constexpr std::array<std::string_view, 8> kToyAi = {"matrix", "vector", "kernel", "tensor",
                                                    "module", "schema", "cipher", "socket"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& pool, Rng& rng) {
  return pool[rng.uniform_index(N)];
}

std::string doc_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "doc%05zu", i);
  return buf;
}

}  // namespace

Corpus synthetic_corpus(std::size_t n_docs, std::uint64_t seed, const SyntheticOptions& o) {
  Rng rng(seed);
  Corpus corpus;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const bool ai = i % 2 == 1;
    const std::size_t len = o.min_len + rng.uniform_index(o.max_len - o.min_len + 1);
    std::string text;
    auto append = [&](std::string_view w) {
      if (!text.empty()) text.push_back(' ');
      text += w;
    };
    if (o.marker) append(ai ? "markerai" : "markerhuman");
    for (std::size_t t = 0; t < len; ++t) {
      if (rng.uniform() < o.function_word_rate) {
        append(pick(kCommon, rng));
      } else {
        const bool own = rng.uniform() < o.own_class_rate;
        append((ai == own) ? pick(kAi, rng) : pick(kHuman, rng));
      }
    }
    // Sentence punctuation so cleaning has something to strip.
    text += ai ? "." : "!";
    corpus.add({doc_id(i), text, ai ? ClassLabel::AI : ClassLabel::Human, std::nullopt});
  }
  return corpus;
}

Corpus separable_corpus(std::size_t n_docs, std::uint64_t seed) {
  SyntheticOptions o;
  o.marker = true;
  o.own_class_rate = 0.5;
  return synthetic_corpus(n_docs, seed, o);
}

Corpus disjoint_toy_corpus(std::size_t n_docs, std::uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const bool ai = i % 2 == 1;
    const std::size_t len = 4 + rng.uniform_index(5);
    std::string text;
    for (std::size_t t = 0; t < len; ++t) {
      if (t) text.push_back(' ');
      text += ai ? pick(kToyAi, rng) : pick(kToyHuman, rng);
    }
    corpus.add({doc_id(i), text, ai ? ClassLabel::AI : ClassLabel::Human, std::nullopt});
  }
  return corpus;
}

EmbeddingSet gaussian_embeddings(const Corpus& corpus, std::uint32_t dim, double separation, std::uint64_t seed,
                                 const std::string& model_id) {
  Rng rng(seed);
  EmbeddingSet set;
  set.model_id = model_id;
  set.dim = dim;
  set.vectors.reserve(corpus.size() * dim);
  for (const auto& d : corpus) {
    set.ids.push_back(d.id);
    const double shift = (d.label == ClassLabel::AI ? 0.5 : -0.5) * separation;
    for (std::uint32_t k = 0; k < dim; ++k) {
      set.vectors.push_back(static_cast<float>(rng.normal(0.0, 1.0) + (k == 0 ? shift : 0.0)));
    }
  }
  return set;
}

RunConfig quick_config(ModelKind kind) {
  RunConfig c = RunConfig::defaults(kind);
  c.vocab_max = 300;
  c.ngram_max = 300;
  c.ngram_n_max = 2;
  switch (kind) {
    case ModelKind::LogReg:
      c.epochs = 5;
      break;
    case ModelKind::Lstm:
      c.embed_dim = 8;
      c.hidden = 8;
      c.max_len = 24;
      c.epochs = 2;
      c.lr = 0.01;
      break;
    default:
      c.epochs = 3;
      c.head_hidden = 16;
      break;
  }
  return c;
}

}  // namespace aidetect::testing
