#include "aidetect/corpus.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "aidetect/error.hpp"
#include "aidetect/numerics.hpp"
#include "json.hpp"

namespace aidetect {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

// --- CSV (RFC 4180) --------------------------------------------------------

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

std::vector<CsvRecord> parse_csv(std::string_view data) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < data.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool end_of_record = false;
    while (i < data.size() && !end_of_record) {
      const char c = data[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < data.size() && data[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        continue;
      }
      switch (c) {
        case '"':
          in_quotes = true;
          ++i;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          ++i;
          break;
        case '\r':
          ++i;
          if (i < data.size() && data[i] == '\n') ++i;
          ++line;
          end_of_record = true;
          break;
        case '\n':
          ++i;
          ++line;
          end_of_record = true;
          break;
        default:
          field.push_back(c);
          ++i;
      }
    }
    if (in_quotes) throw Error(ErrorKind::Truncated, "unterminated quoted field starting at line " + std::to_string(rec.line));
    rec.fields.push_back(std::move(field));
    // A bare blank line is not a record.
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

std::string strip_bom(std::string data) {
  if (data.size() >= 3 && static_cast<unsigned char>(data[0]) == 0xEF &&
      static_cast<unsigned char>(data[1]) == 0xBB && static_cast<unsigned char>(data[2]) == 0xBF) {
    data.erase(0, 3);
  }
  return data;
}

void add_row(Corpus& corpus, std::size_t& dropped, const std::string& where, std::string id, std::string text,
             std::string_view label_text, std::string_view split_text) {
  const auto label = parse_label(label_text);
  if (!label) {
    throw Error(ErrorKind::InvalidLabel,
                where + ": label '" + std::string(label_text) + "' is not one of 0, 1, Human, AI");
  }
  if (id.empty()) throw Error(ErrorKind::MissingColumn, where + ": empty id");
  std::optional<SplitTag> split;
  if (!split_text.empty()) {
    split = parse_split(split_text);
    if (!split) {
      throw Error(ErrorKind::InvalidLabel,
                  where + ": split '" + std::string(split_text) + "' is not train/valid/test");
    }
  }
  if (is_blank(text)) {
    ++dropped;
    return;
  }
  if (corpus.contains(id)) throw Error(ErrorKind::DuplicateId, where + ": duplicate id '" + id + "'");
  corpus.add({std::move(id), std::move(text), *label, split});
}

Corpus read_csv(std::string data) {
  const auto records = parse_csv(data);
  if (records.empty()) throw Error(ErrorKind::MissingColumn, "CSV has no header");
  const auto& header = records.front().fields;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (lower_ascii(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  const auto id_col = column("id");
  const auto text_col = column("text");
  const auto label_col = column("label");
  const auto split_col = column("split");
  if (!id_col || !text_col || !label_col) {
    throw Error(ErrorKind::MissingColumn, "CSV header must contain id,text,label");
  }
  Corpus corpus;
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const std::size_t needed = std::max({*id_col, *text_col, *label_col}) + 1;
    if (f.size() < needed) {
      throw Error(ErrorKind::MissingColumn, "row " + std::to_string(r) + " (line " + std::to_string(records[r].line) +
                                                "): expected " + std::to_string(header.size()) + " fields");
    }
    std::string split = split_col && *split_col < f.size() ? f[*split_col] : std::string();
    add_row(corpus, dropped, "row " + std::to_string(r) + " (line " + std::to_string(records[r].line) + ")", f[*id_col], f[*text_col], f[*label_col], split);
  }
  corpus.set_dropped(dropped);
  return corpus;
}

Corpus read_jsonl(std::istream& in) {
  Corpus corpus;
  std::size_t dropped = 0;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      line = strip_bom(std::move(line));
      first = false;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    ++row;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::MissingColumn, "row " + std::to_string(row) + ": not a JSON object (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("label")) {
      throw Error(ErrorKind::MissingColumn, "row " + std::to_string(row) + ": object needs keys id, text, label");
    }
    std::string id;
    if (obj["id"].is_string()) {
      id = obj["id"].get<std::string>();
    } else if (obj["id"].is_number_integer()) {
      id = std::to_string(obj["id"].get<long long>());
    } else {
      throw Error(ErrorKind::MissingColumn, "row " + std::to_string(row) + ": id must be a string");
    }
    std::string label;
    const auto& jl = obj["label"];
    if (jl.is_string()) {
      label = jl.get<std::string>();
    } else if (jl.is_number_integer()) {
      label = std::to_string(jl.get<long long>());
    } else {
      label = jl.dump();
    }
    std::string text;
    if (obj.contains("text") && obj["text"].is_string()) text = obj["text"].get<std::string>();
    std::string split;
    if (obj.contains("split") && obj["split"].is_string()) split = obj["split"].get<std::string>();
    add_row(corpus, dropped, "row " + std::to_string(row), std::move(id), std::move(text), label, split);
  }
  corpus.set_dropped(dropped);
  return corpus;
}

bool any_split(const Corpus& corpus) {
  return std::any_of(corpus.begin(), corpus.end(), [](const LabeledDocument& d) { return d.split.has_value(); });
}

}  // namespace

void write_csv_field(std::ostream& out, std::string_view field) {
  const bool quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!quote) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

const char* to_string(ClassLabel label) { return label == ClassLabel::AI ? "AI" : "Human"; }

std::optional<ClassLabel> parse_label(std::string_view text) {
  const std::string t = lower_ascii(text);
  if (t == "0" || t == "human") return ClassLabel::Human;
  if (t == "1" || t == "ai") return ClassLabel::AI;
  return std::nullopt;
}

const char* to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::Train: return "train";
    case SplitTag::Valid: return "valid";
    case SplitTag::Test: return "test";
  }
  return "train";
}

std::optional<SplitTag> parse_split(std::string_view text) {
  const std::string t = lower_ascii(text);
  if (t == "train") return SplitTag::Train;
  if (t == "valid") return SplitTag::Valid;
  if (t == "test") return SplitTag::Test;
  return std::nullopt;
}

void Corpus::add(LabeledDocument doc) {
  if (!ids_.insert(doc.id).second) throw Error(ErrorKind::DuplicateId, "duplicate id '" + doc.id + "'");
  counts_[to_int(doc.label)] += 1;
  docs_.push_back(std::move(doc));
}

std::vector<int> Corpus::labels() const {
  std::vector<int> out;
  out.reserve(docs_.size());
  for (const auto& d : docs_) out.push_back(to_int(d.label));
  return out;
}

std::string Corpus::fingerprint() const {
  std::uint64_t h = fnv1a64("corpus");
  for (const auto& d : docs_) {
    h = fnv1a64(d.id, h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(to_string(d.label), h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(d.text, h);
    h = fnv1a64(std::string_view("\x1e", 1), h);
  }
  return hex64(h);
}

std::optional<CorpusFormat> parse_format(std::string_view text) {
  const std::string t = lower_ascii(text);
  if (t == "csv") return CorpusFormat::Csv;
  if (t == "jsonl") return CorpusFormat::Jsonl;
  return std::nullopt;
}

CorpusFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower_ascii(path.extension().string());
  return (ext == ".jsonl" || ext == ".json") ? CorpusFormat::Jsonl : CorpusFormat::Csv;
}

Corpus read_corpus(std::istream& in, CorpusFormat format) {
  if (format == CorpusFormat::Jsonl) return read_jsonl(in);
  std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return read_csv(strip_bom(std::move(data)));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus '" + path.string() + "'");
  Corpus corpus = read_corpus(in, format);
  if (corpus.dropped() > 0) {
    warn(path.string() + ": dropped " + std::to_string(corpus.dropped()) + " row(s) with empty text");
  }
  return corpus;
}

void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format) {
  const bool with_split = any_split(corpus);
  if (format == CorpusFormat::Jsonl) {
    for (const auto& d : corpus) {
      nlohmann::json obj;
      obj["id"] = d.id;
      obj["text"] = d.text;
      obj["label"] = to_string(d.label);
      if (d.split) obj["split"] = to_string(*d.split);
      out << obj.dump() << '\n';
    }
    return;
  }
  out << (with_split ? "id,text,label,split\n" : "id,text,label\n");
  for (const auto& d : corpus) {
    write_csv_field(out, d.id);
    out << ',';
    write_csv_field(out, d.text);
    out << ',' << to_string(d.label);
    if (with_split) out << ',' << (d.split ? to_string(*d.split) : "");
    out << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus, CorpusFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write corpus '" + path.string() + "'");
  write_corpus(out, corpus, format);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

// --- cleaning --------------------------------------------------------------

CleaningProfile CleaningProfile::classic() { return {"classic", true, true, false, true}; }
CleaningProfile CleaningProfile::lstm() { return {"lstm", true, true, true, true}; }
CleaningProfile CleaningProfile::head() { return {"head", true, true, false, true}; }

std::optional<CleaningProfile> CleaningProfile::by_name(std::string_view name) {
  if (name == "classic") return classic();
  if (name == "lstm") return lstm();
  if (name == "head") return head();
  return std::nullopt;
}

std::string clean_text(std::string_view text, const CleaningProfile& profile) {
  std::vector<UChar32> cps;
  cps.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  for (int32_t i = 0; i < length;) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    if (profile.lowercase) c = u_tolower(c);
    if (profile.remove_digits && u_isdigit(c)) continue;
    if (profile.strip_punctuation && !(u_isalpha(c) || u_isdigit(c) || u_isUWhiteSpace(c))) c = U' ';
    if (profile.collapse_whitespace && u_isUWhiteSpace(c)) {
      if (!cps.empty() && cps.back() == U' ') continue;
      c = U' ';
    }
    cps.push_back(c);
  }
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && u_isUWhiteSpace(cps[begin])) ++begin;
  while (end > begin && u_isUWhiteSpace(cps[end - 1])) --end;

  std::string out;
  out.reserve(end - begin);
  for (std::size_t k = begin; k < end; ++k) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(buf, n, cps[k]);
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

// --- splitting -------------------------------------------------------------

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw Error(ErrorKind::DegenerateSplit, "train fraction must lie in (0, 1)");
  }
  if (corpus.count(ClassLabel::Human) == 0 || corpus.count(ClassLabel::AI) == 0) {
    throw Error(ErrorKind::DegenerateSplit, "split needs at least one document of each label");
  }
  Rng rng(seed);
  std::vector<bool> to_train(corpus.size(), false);
  for (ClassLabel label : {ClassLabel::Human, ClassLabel::AI}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].label == label) members.push_back(i);
    }
    rng.shuffle(members);
    // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    const auto n_train =
        static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(members.size()) + 1e-9));
    for (std::size_t k = 0; k < n_train; ++k) to_train[members[k]] = true;
  }
  Corpus train, held_out;
  for (std::size_t i = 0; i < corpus.size(); ++i) (to_train[i] ? train : held_out).add(corpus[i]);
  if (train.empty() || held_out.empty()) {
    throw Error(ErrorKind::DegenerateSplit, "train fraction leaves one part empty");
  }
  return {std::move(train), std::move(held_out)};
}

}  // namespace aidetect
