#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aidetect/heads.hpp"
#include "aidetect/logreg.hpp"
#include "aidetect/lstm.hpp"

namespace aidetect {

enum class ModelKind { LogReg, Lstm, BertNgram, BertCustom, DistilbertHead };

/// "logreg", "lstm", "bert-ngram", "bert-custom", "distilbert-head".
std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);
bool is_head(ModelKind kind);
HeadKind head_kind(ModelKind kind);

/// Every hyperparameter of a training run. Keys not used by a model kind are
/// accepted and recorded but have no effect.
struct RunConfig {
  ModelKind kind = ModelKind::LogReg;
  double lr = 0.05;
  int epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  double l2 = 0.0;
  std::size_t vocab_max = 5000;
  std::size_t min_freq = 1;
  std::size_t embed_dim = 64;
  std::size_t hidden = 64;
  double dropout = 0.3;
  std::size_t max_len = 128;
  double max_grad_norm = 0.0;
  std::size_t ngram_max = 5000;
  std::size_t ngram_min_freq = 2;
  std::size_t ngram_n_max = 4;
  bool relu_on_logits = true;
  std::size_t head_hidden = 512;
  bool calibrate = false;

  static RunConfig defaults(ModelKind kind);

  LogRegConfig logreg() const;
  LstmConfig lstm() const;
  HeadConfig head() const;

  /// (key, value) in documented key order, values formatted as parsed.
  std::vector<std::pair<std::string, std::string>> entries() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Sets one key; throws BadConfig for unknown keys or unparsable values.
void set_config_key(RunConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` lines; `#` starts a comment. Starts from the kind's
/// defaults.
RunConfig parse_run_config(std::string_view text, ModelKind kind);
RunConfig load_run_config(const std::filesystem::path& path, ModelKind kind);

/// Key reference with per-kind defaults, for `train --help`.
std::string config_help();

}  // namespace aidetect
