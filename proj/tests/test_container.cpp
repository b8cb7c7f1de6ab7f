#include <nlohmann/json.hpp>

#include "aidetect/container.hpp"
#include "aidetect/detector.hpp"
#include "doctest.h"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace aidetect;
using aidetect::testing::kAllModelKinds;

namespace {

struct Trained {
  Detector detector;
  const EmbeddingSet* embeddings;
};

const Corpus& corpus() {
  static const Corpus c = testing::synthetic_corpus(60, 13);
  return c;
}

const EmbeddingSet& embeddings() {
  static const EmbeddingSet e = testing::gaussian_embeddings(corpus(), 12, 3.0, 14);
  return e;
}

Trained train(ModelKind kind) {
  const EmbeddingSet* emb = is_head(kind) ? &embeddings() : nullptr;
  return {train_detector(testing::quick_config(kind), corpus(), &corpus(), emb).detector, emb};
}

}  // namespace

TEST_CASE("base64 known vectors") {
  auto enc = [](std::string_view s) {
    return base64_encode({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("foobar") == "Zm9vYmFy");
  const auto dec = base64_decode("Zm9vYmE=");
  CHECK(std::string(dec.begin(), dec.end()) == "fooba");
  CHECK_THROWS_KIND(base64_decode("Zm9"), ErrorKind::BadContainer);
  CHECK_THROWS_KIND(base64_decode("Zm9*"), ErrorKind::BadContainer);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> bytes(rng.uniform_index(40));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.uniform_index(256));
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
  }
}

TEST_CASE("run config parsing") {
  const RunConfig c = parse_run_config("# comment\nlr = 0.5\n\nepochs=7  # trailing\nrelu_on_logits = false\n",
                                       ModelKind::BertNgram);
  CHECK(c.kind == ModelKind::BertNgram);
  CHECK(c.lr == 0.5);
  CHECK(c.epochs == 7);
  CHECK_FALSE(c.relu_on_logits);
  CHECK(c.batch_size == RunConfig::defaults(ModelKind::BertNgram).batch_size);
  CHECK_THROWS_KIND(parse_run_config("learning_rate = 1\n", ModelKind::LogReg), ErrorKind::BadConfig);
  CHECK_THROWS_KIND(parse_run_config("epochs = many\n", ModelKind::LogReg), ErrorKind::BadConfig);
  CHECK_THROWS_KIND(parse_run_config("epochs\n", ModelKind::LogReg), ErrorKind::BadConfig);

  RunConfig round = RunConfig::defaults(ModelKind::Lstm);
  round.lr = 0.1;
  std::string text;
  for (const auto& [k, v] : round.entries()) text += k + " = " + v + "\n";
  CHECK(parse_run_config(text, ModelKind::Lstm) == round);
}

TEST_CASE("config help documents every key") {
  const std::string help = config_help();
  for (const auto& [key, value] : RunConfig::defaults(ModelKind::LogReg).entries()) {
    CHECK_MESSAGE(help.find(key) != std::string::npos, key);
  }
}

TEST_CASE("model kinds parse") {
  for (ModelKind k : kAllModelKinds) CHECK(parse_model_kind(to_string(k)) == k);
  CHECK_FALSE(parse_model_kind("svm").has_value());
}

TEST_CASE("containers round-trip and predict identically for every kind") {
  set_warnings_enabled(false);
  for (ModelKind kind : kAllModelKinds) {
    CAPTURE(to_string(kind));
    Trained t = train(kind);
    const std::string json = container_to_json(t.detector);
    const Detector loaded = container_from_json(json);
    CHECK(loaded.kind() == kind);
    CHECK(loaded.config == t.detector.config);
    CHECK(loaded.threshold() == t.detector.threshold());
    CHECK(container_to_json(loaded) == json);

    Detector rounded = t.detector;
    round_weights(rounded);
    const Scored a = score_detector(rounded, corpus(), t.embeddings);
    const Scored b = score_detector(loaded, corpus(), t.embeddings);
    CHECK(a.scores == b.scores);
    CHECK(a.labels == b.labels);
  }
  set_warnings_enabled(true);
}

TEST_CASE("container json layout") {
  set_warnings_enabled(false);
  const Trained t = train(ModelKind::BertNgram);
  set_warnings_enabled(true);
  const auto j = nlohmann::json::parse(container_to_json(t.detector));
  CHECK(j.at("format_version") == 1);
  CHECK(j.at("model_kind") == "bert-ngram");
  CHECK(j.at("created") == "1970-01-01T00:00:00Z");
  CHECK(j.at("embedding_model_id") == "synthetic-encoder");
  CHECK(j.at("weights").at(0).at("name") == "dense.weight");
  CHECK(j.contains("ngram_vocabulary"));
}

TEST_CASE("save and load through a file") {
  testing::TempDir dir("container_file");
  const Trained t = train(ModelKind::LogReg);
  save_container(dir / "m.json", t.detector);
  const Detector loaded = load_container(dir / "m.json");
  CHECK(container_to_json(loaded) == container_to_json(t.detector));
  CHECK_THROWS_KIND(load_container(dir / "missing.json"), ErrorKind::Io);
}

TEST_CASE("malformed containers are rejected") {
  const Trained t = train(ModelKind::LogReg);
  auto j = nlohmann::json::parse(container_to_json(t.detector));
  CHECK_THROWS_KIND(container_from_json("not json"), ErrorKind::BadContainer);

  auto version = j;
  version["format_version"] = 2;
  CHECK_THROWS_KIND(container_from_json(version.dump()), ErrorKind::BadContainer);

  auto kind = j;
  kind["model_kind"] = "svm";
  CHECK_THROWS_KIND(container_from_json(kind.dump()), ErrorKind::BadContainer);

  auto shape = j;
  shape["weights"][0]["shape"][1] = 3;
  CHECK_THROWS_KIND(container_from_json(shape.dump()), ErrorKind::BadContainer);

  auto idf = j;
  idf["idf"].erase(0);
  CHECK_THROWS_KIND(container_from_json(idf.dump()), ErrorKind::BadContainer);

  auto missing = j;
  missing.erase("vocabulary");
  CHECK_THROWS_KIND(container_from_json(missing.dump()), ErrorKind::BadContainer);
}

TEST_CASE("training is deterministic for every kind") {
  set_warnings_enabled(false);
  for (ModelKind kind : kAllModelKinds) {
    CAPTURE(to_string(kind));
    const EmbeddingSet* emb = is_head(kind) ? &embeddings() : nullptr;
    const auto a = train_detector(testing::quick_config(kind), corpus(), &corpus(), emb);
    const auto b = train_detector(testing::quick_config(kind), corpus(), &corpus(), emb);
    CHECK(container_to_json(a.detector) == container_to_json(b.detector));
    CHECK(a.history == b.history);
  }
  set_warnings_enabled(true);
}

TEST_CASE("head detectors check their embeddings") {
  CHECK_THROWS_KIND(train_detector(testing::quick_config(ModelKind::BertCustom), corpus()), ErrorKind::BadConfig);
  set_warnings_enabled(false);
  const Trained t = train(ModelKind::BertCustom);
  set_warnings_enabled(true);
  const EmbeddingSet other = testing::gaussian_embeddings(corpus(), 12, 3.0, 14, "other-encoder");
  CHECK_THROWS_KIND(score_detector(t.detector, corpus(), &other), ErrorKind::ModelIdMismatch);
  CHECK_THROWS_KIND(score_detector(t.detector, corpus(), nullptr), ErrorKind::BadConfig);
  Corpus extra = corpus();
  extra.add({"unseen", "new text", ClassLabel::AI, {}});
  CHECK_THROWS_KIND(score_detector(t.detector, extra, &embeddings()), ErrorKind::MissingId);
}
