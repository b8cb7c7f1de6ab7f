#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aidetect/corpus.hpp"
#include "aidetect/embedding_io.hpp"
#include "aidetect/heads.hpp"
#include "aidetect/logreg.hpp"
#include "aidetect/lstm.hpp"
#include "aidetect/run_config.hpp"
#include "aidetect/text_features.hpp"

namespace aidetect {

/// Classic features: bag of words, TF-IDF and POS frequencies, concatenated
/// and standardized, feeding logistic regression.
struct LogRegPipeline {
  Vocabulary vocab;
  std::vector<double> idf;
  LogRegModel model;  // holds the scaler
};

struct LstmPipeline {
  Vocabulary unigrams;
  Vocabulary bigrams;
  DualStreamLstmModel model;
};

struct HeadPipeline {
  std::optional<NgramVocabulary> ngrams;  // BertNgram only
  HeadModel model;
};

/// A trained detector together with everything needed to score raw text.
struct Detector {
  RunConfig config;
  std::variant<LogRegPipeline, LstmPipeline, HeadPipeline> pipeline;

  ModelKind kind() const noexcept { return config.kind; }
  /// Decision threshold on P(AI); nullopt for an uncalibrated head (argmax).
  std::optional<double> threshold() const;
  /// Model id of the embeddings a head was trained on; empty otherwise.
  std::string embedding_model_id() const;
  ParameterSet& params();
  const ParameterSet& params() const;
};

struct DetectorTrainResult {
  Detector detector;
  LossHistory history;
};

struct Scored {
  std::vector<double> scores;  // P(AI)
  std::vector<int> labels;
};

/// Fits features on `train`, trains, and (when config.calibrate and `valid` is
/// given) sets the threshold by Youden's J on the validation scores. Head
/// kinds require `embeddings`.
DetectorTrainResult train_detector(const RunConfig& config, const Corpus& train, const Corpus* valid = nullptr,
                                   const EmbeddingSet* embeddings = nullptr);

/// Scores and labels for every document, in corpus order. Head kinds require
/// embeddings with the model id the head was trained on.
Scored score_detector(const Detector& detector, const Corpus& input, const EmbeddingSet* embeddings = nullptr,
                      Exec exec = Exec::Parallel);

/// Sets the threshold from scores on labelled data (Youden's J).
double calibrate_detector(Detector& detector, const Corpus& valid, const EmbeddingSet* embeddings = nullptr);

/// Standardized logreg feature matrix for `corpus`.
FeatureMatrix logreg_features(const LogRegPipeline& pipeline, const Corpus& corpus, Exec exec = Exec::Parallel);

/// Unigram/bigram sequences for `corpus`.
std::vector<SequencePair> lstm_sequences(const LstmPipeline& pipeline, const Corpus& corpus,
                                         Exec exec = Exec::Parallel);

}  // namespace aidetect
