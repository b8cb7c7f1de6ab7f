#include "aidetect/container.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <ctime>

#include "aidetect/error.hpp"
#include "aidetect/evaluation.hpp"
#include "aidetect/pos_tagger.hpp"
#include "json.hpp"

namespace aidetect {

namespace {

using nlohmann::json;
namespace bai = boost::archive::iterators;

static_assert(std::endian::native == std::endian::little, "weight encoding assumes a little-endian host");

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::BadContainer, msg); }

std::string created_timestamp() {
  std::int64_t epoch = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && v >= 0) epoch = v;
  }
  const std::time_t t = static_cast<std::time_t>(epoch);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json profile_json(const CleaningProfile& p) {
  return {{"name", p.name},
          {"lowercase", p.lowercase},
          {"strip_punctuation", p.strip_punctuation},
          {"remove_digits", p.remove_digits},
          {"collapse_whitespace", p.collapse_whitespace}};
}

CleaningProfile profile_from(const json& j) {
  CleaningProfile p;
  p.name = j.at("name").get<std::string>();
  p.lowercase = j.at("lowercase").get<bool>();
  p.strip_punctuation = j.at("strip_punctuation").get<bool>();
  p.remove_digits = j.at("remove_digits").get<bool>();
  p.collapse_whitespace = j.at("collapse_whitespace").get<bool>();
  return p;
}

json params_json(const ParameterSet& params) {
  json out = json::array();
  for (std::size_t id = 0; id < params.slot_count(); ++id) {
    const auto& s = params.slot(id);
    const auto values = params.span(id);
    std::vector<std::uint8_t> bytes(values.size() * sizeof(float));
    for (std::size_t i = 0; i < values.size(); ++i) {
      const float f = static_cast<float>(values[i]);
      std::memcpy(bytes.data() + i * sizeof(float), &f, sizeof f);
    }
    out.push_back({{"name", s.name}, {"shape", {s.rows, s.cols}}, {"data", base64_encode(bytes)}});
  }
  return out;
}

// Fills a freshly shaped parameter set; every slot must be present with the
// same shape.
void load_params(ParameterSet& params, const json& j) {
  if (!j.is_array() || j.size() != params.slot_count()) bad("weight list does not match the model layout");
  for (std::size_t id = 0; id < params.slot_count(); ++id) {
    const auto& s = params.slot(id);
    const auto& w = j.at(id);
    if (w.at("name").get<std::string>() != s.name) bad("expected weight '" + s.name + "'");
    const auto shape = w.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] != s.rows || shape[1] != s.cols) bad("weight '" + s.name + "' has wrong shape");
    const auto bytes = base64_decode(w.at("data").get<std::string>());
    if (bytes.size() != s.size() * sizeof(float)) bad("weight '" + s.name + "' has wrong byte length");
    auto dst = params.span(id);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      float f;
      std::memcpy(&f, bytes.data() + i * sizeof(float), sizeof f);
      if (!std::isfinite(f)) bad("weight '" + s.name + "' holds a non-finite value");
      dst[i] = static_cast<double>(f);
    }
  }
}

json vocab_json(const Vocabulary& v) { return {{"profile", profile_json(v.profile())}, {"tokens", v.tokens()}}; }

Vocabulary vocab_from(const json& j) {
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>(), profile_from(j.at("profile")));
}

json threshold_json(std::optional<double> t) { return t ? json(*t) : json(nullptr); }

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  using It = bai::base64_from_binary<bai::transform_width<const std::uint8_t*, 6, 8>>;
  std::string out(It(bytes.data()), It(bytes.data() + bytes.size()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) bad("base64 length is not a multiple of 4");
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  const std::string_view body = text.substr(0, text.size() - pad);
  for (char c : body) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '/';
    if (!ok) bad("invalid base64 character");
  }
  using It = bai::transform_width<bai::binary_from_base64<const char*>, 8, 6>;
  std::vector<std::uint8_t> out(It(body.data()), It(body.data() + body.size()));
  // transform_width may emit one extra partial byte from the final sextets.
  out.resize(text.size() / 4 * 3 - pad);
  return out;
}

std::string container_to_json(const Detector& d) {
  json j;
  j["format_version"] = kContainerFormatVersion;
  j["model_kind"] = std::string(to_string(d.kind()));
  j["created"] = created_timestamp();
  json cfg = json::object();
  for (const auto& [k, v] : d.config.entries()) cfg[k] = v;
  j["config"] = cfg;
  j["threshold"] = threshold_json(d.threshold());

  if (const auto* p = std::get_if<LogRegPipeline>(&d.pipeline)) {
    j["cleaning_profile"] = profile_json(p->vocab.profile());
    j["pos_lexicon_version"] = std::string(pos_lexicon_version());
    j["vocabulary"] = vocab_json(p->vocab);
    j["idf"] = p->idf;
    j["scaler"] = {{"mean", p->model.scaler.mean},
                   {"std", p->model.scaler.std},
                   {"constant_columns", p->model.scaler.constant_columns}};
    j["feature_fingerprints"] = p->model.feature_fingerprints;
    j["weights"] = params_json(p->model.params);
  } else if (const auto* l = std::get_if<LstmPipeline>(&d.pipeline)) {
    const auto& m = l->model;
    j["cleaning_profile"] = profile_json(l->unigrams.profile());
    j["vocabulary"] = vocab_json(l->unigrams);
    j["bigram_vocabulary"] = vocab_json(l->bigrams);
    j["architecture"] = {{"embed_dim", m.embed_dim()},
                         {"hidden", m.hidden()},
                         {"dropout", m.dropout()},
                         {"max_len", m.max_len()},
                         {"uni_rows", m.uni_rows()},
                         {"bi_rows", m.bi_rows()}};
    j["weights"] = params_json(m.params);
  } else {
    const auto& h = std::get<HeadPipeline>(d.pipeline);
    const auto& m = h.model;
    j["cleaning_profile"] = profile_json(h.ngrams ? h.ngrams->profile() : CleaningProfile::head());
    j["embedding_model_id"] = m.embedding_model_id;
    if (h.ngrams) {
      j["ngram_vocabulary"] = {{"n_min", h.ngrams->n_min()},
                               {"n_max", h.ngrams->n_max()},
                               {"min_freq", h.ngrams->min_freq()},
                               {"profile", profile_json(h.ngrams->profile())},
                               {"ngrams", h.ngrams->ngrams()}};
    }
    j["architecture"] = {{"input_dim", m.input_dim},
                         {"ngram_dim", m.ngram_dim},
                         {"hidden", m.hidden},
                         {"dropout", m.dropout_p},
                         {"relu_on_logits", m.relu_on_logits}};
    j["weights"] = params_json(m.params);
  }
  return j.dump(2) + "\n";
}

Detector container_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != kContainerFormatVersion) bad("unsupported container format_version");
    const auto kind = parse_model_kind(j.at("model_kind").get<std::string>());
    if (!kind) bad("unknown model_kind");
    Detector d{RunConfig::defaults(*kind), LogRegPipeline{}};
    for (const auto& [k, v] : j.at("config").items()) set_config_key(d.config, k, v.get<std::string>());
    const auto& thr = j.at("threshold");

    switch (*kind) {
      case ModelKind::LogReg: {
        LogRegPipeline p;
        p.vocab = vocab_from(j.at("vocabulary"));
        p.idf = j.at("idf").get<std::vector<double>>();
        if (p.idf.size() != p.vocab.size()) bad("idf length does not match the vocabulary");
        const auto& s = j.at("scaler");
        p.model.scaler.mean = s.at("mean").get<std::vector<double>>();
        p.model.scaler.std = s.at("std").get<std::vector<double>>();
        p.model.scaler.constant_columns = s.at("constant_columns").get<std::vector<std::size_t>>();
        const std::size_t width = 2 * p.vocab.size() + kPosTagCount;
        if (p.model.scaler.mean.size() != width || p.model.scaler.std.size() != width) {
          bad("scaler width does not match the feature layout");
        }
        const std::string lexicon = j.at("pos_lexicon_version").get<std::string>();
        if (lexicon != pos_lexicon_version()) {
          warn("model was built with POS lexicon version " + lexicon + ", this build has " +
               std::string(pos_lexicon_version()));
        }
        auto scaler = std::move(p.model.scaler);
        p.model = LogRegModel::zeros(width);
        p.model.scaler = std::move(scaler);
        p.model.feature_fingerprints = j.at("feature_fingerprints").get<std::vector<std::string>>();
        load_params(p.model.params, j.at("weights"));
        if (!thr.is_null()) p.model.threshold = thr.get<double>();
        d.pipeline = std::move(p);
        break;
      }
      case ModelKind::Lstm: {
        LstmPipeline p;
        p.unigrams = vocab_from(j.at("vocabulary"));
        p.bigrams = vocab_from(j.at("bigram_vocabulary"));
        const auto& a = j.at("architecture");
        const auto uni_rows = a.at("uni_rows").get<std::size_t>();
        const auto bi_rows = a.at("bi_rows").get<std::size_t>();
        if (uni_rows != p.unigrams.size() + 2 || bi_rows != p.bigrams.size() + 2) {
          bad("embedding tables do not match the vocabularies");
        }
        p.model = DualStreamLstmModel(uni_rows, bi_rows, a.at("embed_dim").get<std::size_t>(),
                                      a.at("hidden").get<std::size_t>(), a.at("dropout").get<double>(),
                                      a.at("max_len").get<std::size_t>());
        load_params(p.model.params, j.at("weights"));
        if (!thr.is_null()) p.model.threshold = thr.get<double>();
        d.pipeline = std::move(p);
        break;
      }
      case ModelKind::BertNgram:
      case ModelKind::BertCustom:
      case ModelKind::DistilbertHead: {
        HeadPipeline p;
        const auto& a = j.at("architecture");
        if (j.contains("ngram_vocabulary")) {
          const auto& n = j.at("ngram_vocabulary");
          p.ngrams = NgramVocabulary(n.at("n_min").get<std::size_t>(), n.at("n_max").get<std::size_t>(),
                                     n.at("min_freq").get<std::size_t>(),
                                     n.at("ngrams").get<std::vector<std::string>>(), profile_from(n.at("profile")));
        }
        const auto ngram_dim = a.at("ngram_dim").get<std::size_t>();
        if (*kind == ModelKind::BertNgram && (!p.ngrams || p.ngrams->size() != ngram_dim)) {
          bad("n-gram vocabulary does not match the head width");
        }
        p.model = HeadModel::create(head_kind(*kind), a.at("input_dim").get<std::size_t>(), ngram_dim,
                                    a.at("hidden").get<std::size_t>(), a.at("relu_on_logits").get<bool>());
        p.model.embedding_model_id = j.at("embedding_model_id").get<std::string>();
        load_params(p.model.params, j.at("weights"));
        if (!thr.is_null()) p.model.threshold = thr.get<double>();
        d.pipeline = std::move(p);
        break;
      }
    }
    return d;
  } catch (const json::exception& e) {
    bad(std::string("malformed model container: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BadContainer) throw;
    bad(std::string("invalid model container: ") + e.what());
  }
}

void save_container(const std::filesystem::path& path, const Detector& detector) {
  write_text_file(path, container_to_json(detector));
}

Detector load_container(const std::filesystem::path& path) { return container_from_json(read_text_file(path)); }

void round_weights(Detector& detector) { detector.params().round_to_f32(); }

}  // namespace aidetect
