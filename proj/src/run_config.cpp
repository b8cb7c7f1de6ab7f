#include "aidetect/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "aidetect/error.hpp"
#include "aidetect/evaluation.hpp"

namespace aidetect {

namespace {

constexpr ModelKind kAllKinds[] = {ModelKind::LogReg, ModelKind::Lstm, ModelKind::BertNgram, ModelKind::BertCustom,
                                   ModelKind::DistilbertHead};

// Shortest text that parses back to the same double.
std::string shortest_real(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::BadConfig, "invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

struct KeySpec {
  std::string_view name;
  std::string_view help;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
KeySpec size_key(std::string_view name, std::string_view help, T RunConfig::*field, T min) {
  return {name, help,
          [=](RunConfig& c, std::string_view v) {
            const T x = parse_number<T>(name, v);
            if (x < min) bad_value(name, v);
            c.*field = x;
          },
          [=](const RunConfig& c) { return std::to_string(c.*field); }};
}

KeySpec real_key(std::string_view name, std::string_view help, double RunConfig::*field, double min, double max) {
  return {name, help,
          [=](RunConfig& c, std::string_view v) {
            const double x = parse_number<double>(name, v);
            if (!(x >= min && x <= max)) bad_value(name, v);
            c.*field = x;
          },
          [=](const RunConfig& c) { return shortest_real(c.*field); }};
}

KeySpec bool_key(std::string_view name, std::string_view help, bool RunConfig::*field) {
  return {name, help, [=](RunConfig& c, std::string_view v) { c.*field = parse_bool(name, v); },
          [=](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

const std::vector<KeySpec>& keys() {
  static const std::vector<KeySpec> specs = {
      real_key("lr", "learning rate (SGD for logreg, Adam otherwise)", &RunConfig::lr, 1e-12, 1e6),
      size_key("epochs", "training epochs", &RunConfig::epochs, 1),
      size_key<std::size_t>("batch_size", "mini-batch size", &RunConfig::batch_size, 1),
      size_key<std::uint64_t>("seed", "seed for initialization, shuffling and dropout", &RunConfig::seed, 0),
      real_key("l2", "L2 penalty coefficient (logreg)", &RunConfig::l2, 0.0, 1e6),
      size_key<std::size_t>("vocab_max", "maximum vocabulary size (logreg, lstm)", &RunConfig::vocab_max, 1),
      size_key<std::size_t>("min_freq", "minimum token frequency (logreg, lstm)", &RunConfig::min_freq, 1),
      size_key<std::size_t>("embed_dim", "embedding width (lstm)", &RunConfig::embed_dim, 1),
      size_key<std::size_t>("hidden", "LSTM hidden width (lstm)", &RunConfig::hidden, 1),
      real_key("dropout", "dropout before the output layer (lstm)", &RunConfig::dropout, 0.0, 0.99),
      size_key<std::size_t>("max_len", "sequence length after truncation/padding (lstm)", &RunConfig::max_len, 1),
      real_key("max_grad_norm", "gradient clipping norm, 0 disables (lstm)", &RunConfig::max_grad_norm, 0.0, 1e12),
      size_key<std::size_t>("ngram_max", "maximum n-gram features (bert-ngram)", &RunConfig::ngram_max, 1),
      size_key<std::size_t>("ngram_min_freq", "minimum n-gram frequency (bert-ngram)", &RunConfig::ngram_min_freq, 1),
      size_key<std::size_t>("ngram_n_max", "largest n in the n-gram range 1..n (bert-ngram)", &RunConfig::ngram_n_max, 1),
      bool_key("relu_on_logits", "apply ReLU to the logits (bert-ngram)", &RunConfig::relu_on_logits),
      size_key<std::size_t>("head_hidden", "intermediate width (bert-custom)", &RunConfig::head_hidden, 1),
      bool_key("calibrate", "pick the threshold on --valid by Youden's J", &RunConfig::calibrate),
  };
  return specs;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogReg:
      return "logreg";
    case ModelKind::Lstm:
      return "lstm";
    case ModelKind::BertNgram:
      return "bert-ngram";
    case ModelKind::BertCustom:
      return "bert-custom";
    case ModelKind::DistilbertHead:
      return "distilbert-head";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (ModelKind k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool is_head(ModelKind kind) {
  return kind == ModelKind::BertNgram || kind == ModelKind::BertCustom || kind == ModelKind::DistilbertHead;
}

HeadKind head_kind(ModelKind kind) {
  switch (kind) {
    case ModelKind::BertNgram:
      return HeadKind::BertNgram;
    case ModelKind::BertCustom:
      return HeadKind::BertCustom;
    case ModelKind::DistilbertHead:
      return HeadKind::DistilbertHead;
    default:
      throw Error(ErrorKind::BadConfig, std::string(to_string(kind)) + " is not a head model");
  }
}

RunConfig RunConfig::defaults(ModelKind kind) {
  RunConfig c;
  c.kind = kind;
  switch (kind) {
    case ModelKind::LogReg:
      c.lr = 0.05;
      c.epochs = 30;
      break;
    case ModelKind::Lstm:
      c.lr = 1e-3;
      c.epochs = 40;
      c.calibrate = true;
      break;
    case ModelKind::BertNgram:
    case ModelKind::BertCustom:
    case ModelKind::DistilbertHead:
      c.lr = 1e-3;
      c.epochs = 30;
      break;
  }
  return c;
}

LogRegConfig RunConfig::logreg() const { return {lr, epochs, batch_size, seed, l2}; }

LstmConfig RunConfig::lstm() const {
  return {embed_dim, hidden, lr, epochs, batch_size, dropout, seed, max_len, max_grad_norm};
}

HeadConfig RunConfig::head() const { return {lr, epochs, batch_size, seed, relu_on_logits, head_hidden}; }

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(std::string(k.name), k.get(*this));
  return out;
}

void set_config_key(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& k : keys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  throw Error(ErrorKind::BadConfig, "unknown config key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view text, ModelKind kind) {
  RunConfig config = RunConfig::defaults(kind);
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::BadConfig, "config line " + std::to_string(line_no) + " is not key = value");
    }
    try {
      set_config_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorKind::BadConfig, "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path, ModelKind kind) {
  return parse_run_config(read_text_file(path), kind);
}

std::string config_help() {
  std::ostringstream out;
  out << "Config file keys (key = value, '#' comments). Defaults per model:\n";
  for (const auto& k : keys()) {
    out << "  " << k.name << ": " << k.help << "\n    default:";
    std::vector<std::string> values;
    for (ModelKind kind : kAllKinds) values.push_back(k.get(RunConfig::defaults(kind)));
    if (std::all_of(values.begin(), values.end(), [&](const std::string& v) { return v == values.front(); })) {
      out << ' ' << values.front() << '\n';
      continue;
    }
    for (std::size_t i = 0; i < values.size(); ++i) out << ' ' << to_string(kAllKinds[i]) << '=' << values[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace aidetect
