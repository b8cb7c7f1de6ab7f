#include "aidetect/detector.hpp"

#include "aidetect/error.hpp"
#include "aidetect/evaluation.hpp"
#include "aidetect/pos_tagger.hpp"

namespace aidetect {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

FeatureMatrix raw_logreg_features(const Vocabulary& vocab, std::span<const double> idf,
                                  const std::vector<Tokens>& docs, Exec exec) {
  const FeatureMatrix bow = bag_of_words(docs, vocab, exec);
  const FeatureMatrix tf = tfidf_transform(docs, vocab, idf, exec);
  const FeatureMatrix pos = pos_features(docs, exec);
  const FeaturePart parts[] = {{"bow", bow}, {"tfidf", tf}, {"pos", pos}};
  return concat_features(parts);
}

Vocabulary bigram_vocabulary(const std::vector<Tokens>& docs, const RunConfig& config) {
  std::vector<Tokens> pairs;
  pairs.reserve(docs.size());
  for (const auto& d : docs) pairs.push_back(bigram_tokens(d));
  try {
    return build_vocabulary(pairs, CleaningProfile::lstm(), config.vocab_max, config.min_freq);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyVocabulary) throw;
    warn("no bigram reaches min_freq; the bigram stream sees only padding and OOV");
    return Vocabulary({}, CleaningProfile::lstm());
  }
}

const EmbeddingSet& require_embeddings(const Detector& d, const EmbeddingSet* embeddings) {
  if (!embeddings) {
    throw Error(ErrorKind::BadConfig, std::string(to_string(d.kind())) + " needs --embeddings (an EMBX file)");
  }
  const auto expected = d.embedding_model_id();
  if (!expected.empty() && embeddings->model_id != expected) {
    throw Error(ErrorKind::ModelIdMismatch, "embeddings come from '" + embeddings->model_id + "' but the model expects '" +
                                                expected + "'");
  }
  return *embeddings;
}

struct HeadBatch {
  Tensor2 embeddings;
  std::optional<Tensor2> ngrams;
  HeadInputs inputs() const { return {embeddings, ngrams ? &*ngrams : nullptr}; }
};

HeadBatch head_batch(const HeadPipeline& p, const Corpus& corpus, const EmbeddingSet& set, Exec exec) {
  HeadBatch b{align(corpus, set), std::nullopt};
  if (p.ngrams) {
    const auto docs = tokenize_corpus(corpus, p.ngrams->profile(), exec);
    b.ngrams = ngram_features(docs, *p.ngrams, exec).data;
  }
  return b;
}

void set_threshold(Detector& d, double t) {
  std::visit(Overloaded{[&](LogRegPipeline& p) { p.model.threshold = t; },
                        [&](LstmPipeline& p) { p.model.threshold = t; },
                        [&](HeadPipeline& p) { p.model.threshold = t; }},
             d.pipeline);
}

}  // namespace

std::optional<double> Detector::threshold() const {
  return std::visit(Overloaded{[](const LogRegPipeline& p) -> std::optional<double> { return p.model.threshold; },
                               [](const LstmPipeline& p) -> std::optional<double> { return p.model.threshold; },
                               [](const HeadPipeline& p) { return p.model.threshold; }},
                    pipeline);
}

std::string Detector::embedding_model_id() const {
  if (const auto* h = std::get_if<HeadPipeline>(&pipeline)) return h->model.embedding_model_id;
  return {};
}

ParameterSet& Detector::params() {
  return std::visit([](auto& p) -> ParameterSet& { return p.model.params; }, pipeline);
}

const ParameterSet& Detector::params() const {
  return std::visit([](const auto& p) -> const ParameterSet& { return p.model.params; }, pipeline);
}

FeatureMatrix logreg_features(const LogRegPipeline& pipeline, const Corpus& corpus, Exec exec) {
  const auto docs = tokenize_corpus(corpus, pipeline.vocab.profile(), exec);
  return apply_scaler(raw_logreg_features(pipeline.vocab, pipeline.idf, docs, exec), pipeline.model.scaler, exec);
}

std::vector<SequencePair> lstm_sequences(const LstmPipeline& pipeline, const Corpus& corpus, Exec exec) {
  const auto docs = tokenize_corpus(corpus, pipeline.unigrams.profile(), exec);
  const std::size_t max_len = pipeline.model.max_len();
  std::vector<SequencePair> out(docs.size());
  for_each_index(docs.size(), exec, [&](std::size_t i) {
    out[i].uni = encode_sequence(docs[i], pipeline.unigrams, max_len);
    out[i].bi = build_bigram_sequence(docs[i], pipeline.bigrams, max_len);
  });
  return out;
}

DetectorTrainResult train_detector(const RunConfig& config, const Corpus& train, const Corpus* valid,
                                   const EmbeddingSet* embeddings) {
  if (train.empty()) throw Error(ErrorKind::EmptyTrainingSet, "training corpus is empty");
  const auto train_labels = train.labels();
  std::vector<int> valid_labels;
  if (valid) valid_labels = valid->labels();
  DetectorTrainResult out{Detector{config, LogRegPipeline{}}, {}};

  switch (config.kind) {
    case ModelKind::LogReg: {
      LogRegPipeline p;
      const auto docs = tokenize_corpus(train, CleaningProfile::classic());
      p.vocab = build_vocabulary(docs, CleaningProfile::classic(), config.vocab_max, config.min_freq);
      p.idf = fit_idf(docs, p.vocab);
      FeatureMatrix x = raw_logreg_features(p.vocab, p.idf, docs, Exec::Parallel);
      const ScalerStats scaler = fit_scaler(x);
      x = apply_scaler(x, scaler);
      std::optional<FeatureMatrix> xv;
      if (valid) {
        p.model.scaler = scaler;
        xv = logreg_features(p, *valid);
      }
      auto r = valid ? train_logreg({x, train_labels}, config.logreg(), LabeledMatrix{*xv, valid_labels})
                     : train_logreg({x, train_labels}, config.logreg());
      p.model = std::move(r.model);
      p.model.scaler = scaler;
      p.model.feature_fingerprints = {p.vocab.fingerprint(), "pos-lexicon-" + std::string(pos_lexicon_version())};
      out.detector.pipeline = std::move(p);
      out.history = std::move(r.history);
      break;
    }
    case ModelKind::Lstm: {
      LstmPipeline p;
      const auto docs = tokenize_corpus(train, CleaningProfile::lstm());
      p.unigrams = build_vocabulary(docs, CleaningProfile::lstm(), config.vocab_max, config.min_freq);
      p.bigrams = bigram_vocabulary(docs, config);
      // Sequences need max_len from the model; build a shell pipeline first.
      p.model = DualStreamLstmModel(p.unigrams.size() + 2, p.bigrams.size() + 2, config.embed_dim, config.hidden,
                                    config.dropout, config.max_len);
      const auto seqs = lstm_sequences(p, train);
      std::vector<SequencePair> vseqs;
      if (valid) vseqs = lstm_sequences(p, *valid);
      auto r = train_lstm({seqs, train_labels}, p.unigrams.size() + 2, p.bigrams.size() + 2, config.lstm(),
                          valid ? std::optional<LstmData>(LstmData{vseqs, valid_labels}) : std::nullopt);
      p.model = std::move(r.model);
      out.detector.pipeline = std::move(p);
      out.history = std::move(r.history);
      break;
    }
    case ModelKind::BertNgram:
    case ModelKind::BertCustom:
    case ModelKind::DistilbertHead: {
      if (!embeddings) {
        throw Error(ErrorKind::BadConfig, std::string(to_string(config.kind)) + " needs --embeddings (an EMBX file)");
      }
      HeadPipeline p;
      if (config.kind == ModelKind::BertNgram) {
        const auto docs = tokenize_corpus(train, CleaningProfile::head());
        p.ngrams = build_ngram_vocabulary(docs, CleaningProfile::head(), 1, config.ngram_n_max, config.ngram_max,
                                          config.ngram_min_freq);
      }
      const HeadBatch tb = head_batch(p, train, *embeddings, Exec::Parallel);
      std::optional<HeadBatch> vb;
      if (valid) vb = head_batch(p, *valid, *embeddings, Exec::Parallel);
      auto r = train_head(head_kind(config.kind), {tb.inputs(), train_labels}, config.head(),
                          vb ? std::optional<HeadData>(HeadData{vb->inputs(), valid_labels}) : std::nullopt);
      p.model = std::move(r.model);
      p.model.embedding_model_id = embeddings->model_id;
      out.detector.pipeline = std::move(p);
      out.history = std::move(r.history);
      break;
    }
  }

  if (config.calibrate && valid) calibrate_detector(out.detector, *valid, embeddings);
  return out;
}

Scored score_detector(const Detector& detector, const Corpus& input, const EmbeddingSet* embeddings, Exec exec) {
  Scored out;
  std::visit(Overloaded{[&](const LogRegPipeline& p) {
                          const auto x = logreg_features(p, input, exec);
                          out.scores = predict_proba(p.model, x, exec);
                          out.labels.resize(out.scores.size());
                          for (std::size_t i = 0; i < out.scores.size(); ++i) {
                            out.labels[i] = out.scores[i] >= p.model.threshold ? 1 : 0;
                          }
                        },
                        [&](const LstmPipeline& p) {
                          out.scores = lstm_predict_proba(p.model, lstm_sequences(p, input, exec), exec);
                          out.labels.resize(out.scores.size());
                          for (std::size_t i = 0; i < out.scores.size(); ++i) {
                            out.labels[i] = out.scores[i] >= p.model.threshold ? 1 : 0;
                          }
                        },
                        [&](const HeadPipeline& p) {
                          const auto& set = require_embeddings(detector, embeddings);
                          const HeadBatch b = head_batch(p, input, set, exec);
                          auto pred = head_predict(p.model, b.inputs(), exec);
                          out.scores = std::move(pred.scores);
                          out.labels = std::move(pred.labels);
                        }},
             detector.pipeline);
  return out;
}

double calibrate_detector(Detector& detector, const Corpus& valid, const EmbeddingSet* embeddings) {
  const auto labels = valid.labels();
  const auto scored = score_detector(detector, valid, embeddings);
  const auto curve = roc_curve(scored.scores, labels);
  const double t = youden_threshold(curve).threshold;
  set_threshold(detector, t);
  return t;
}

}  // namespace aidetect
