#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "aidetect/container.hpp"
#include "aidetect/detector.hpp"
#include "aidetect/embedding_io.hpp"
#include "aidetect/ensemble.hpp"
#include "aidetect/error.hpp"
#include "aidetect/evaluation.hpp"
#include "aidetect/pos_tagger.hpp"
#include "aidetect/run_config.hpp"

namespace aidetect::cli {

namespace {

namespace fs = std::filesystem;

Corpus read_input(const std::string& path, const std::string& format = "") {
  CorpusFormat f = format_from_path(path);
  if (!format.empty()) {
    const auto parsed = parse_format(format);
    if (!parsed) throw Error(ErrorKind::BadConfig, "unknown corpus format '" + format + "' (csv or jsonl)");
    f = *parsed;
  }
  return load_corpus(path, f);
}

std::optional<EmbeddingSet> read_optional_embx(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return read_embx(path);
}

std::vector<std::string> doc_ids(const Corpus& corpus) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& d : corpus) ids.push_back(d.id);
  return ids;
}

// ---- split ----------------------------------------------------------------

struct SplitArgs {
  std::string input, format, out_dir;
  double train_frac = 0.8;
  std::uint64_t seed = 42;
};

void cmd_split(const SplitArgs& a, std::ostream& out) {
  const Corpus corpus = read_input(a.input, a.format);
  const auto [train, test] = split_corpus(corpus, a.train_frac, a.seed);
  fs::create_directories(a.out_dir);
  save_corpus(fs::path(a.out_dir) / "train.csv", train, CorpusFormat::Csv);
  save_corpus(fs::path(a.out_dir) / "test.csv", test, CorpusFormat::Csv);
  out << "train " << train.size() << " documents, test " << test.size() << " documents\n";
}

// ---- featurize ------------------------------------------------------------

struct FeaturizeArgs {
  std::string input, out, features = "classic", pos_summary;
  std::size_t vocab_max = 5000, min_freq = 1, ngram_n_max = 4, ngram_max = 5000, ngram_min_freq = 2;
};

void write_feature_csv(const fs::path& path, const Corpus& corpus, const FeatureMatrix& m) {
  std::ostringstream s;
  s << "doc_id,label";
  for (const auto& name : m.column_names) {
    s << ',';
    write_csv_field(s, name);
  }
  s << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    write_csv_field(s, corpus[r].id);
    s << ',' << to_int(corpus[r].label);
    for (double v : m.data.row(r)) s << ',' << format_real(v);
    s << '\n';
  }
  write_text_file(path, s.str());
}

void cmd_featurize(const FeaturizeArgs& a, std::ostream& out) {
  const Corpus corpus = read_input(a.input);
  const CleaningProfile profile = CleaningProfile::classic();
  const auto docs = tokenize_corpus(corpus, profile);
  FeatureMatrix m;
  if (a.features == "pos") {
    m = pos_features(docs);
  } else if (a.features == "ngram") {
    const auto nv = build_ngram_vocabulary(docs, profile, 1, a.ngram_n_max, a.ngram_max, a.ngram_min_freq);
    m = ngram_features(docs, nv);
  } else {
    const Vocabulary vocab = build_vocabulary(docs, profile, a.vocab_max, a.min_freq);
    if (a.features == "bow") {
      m = bag_of_words(docs, vocab);
    } else if (a.features == "tfidf") {
      m = tfidf(docs, vocab).matrix;
    } else {
      const FeatureMatrix bow = bag_of_words(docs, vocab);
      const FeatureMatrix tf = tfidf(docs, vocab).matrix;
      const FeatureMatrix pos = pos_features(docs);
      const FeaturePart parts[] = {{"bow", bow}, {"tfidf", tf}, {"pos", pos}};
      m = concat_features(parts);
    }
  }
  write_feature_csv(a.out, corpus, m);
  out << m.rows() << " rows x " << m.cols() << " columns\n";

  if (!a.pos_summary.empty()) {
    // Mean tag distribution per class.
    std::array<std::array<double, kPosTagCount>, 2> sums{};
    std::array<std::size_t, 2> n{};
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto freq = pos_feature_vector(pos_tag(docs[d]));
      const int c = to_int(corpus[d].label);
      for (std::size_t t = 0; t < kPosTagCount; ++t) sums[c][t] += freq[t];
      n[c] += 1;
    }
    std::ostringstream s;
    s << "tag,Human,AI\n";
    for (std::size_t t = 0; t < kPosTagCount; ++t) {
      s << kPosTagNames[t];
      for (int c = 0; c < 2; ++c) s << ',' << format_real(n[c] ? sums[c][t] / static_cast<double>(n[c]) : 0.0);
      s << '\n';
    }
    write_text_file(a.pos_summary, s.str());
  }
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string model, train, valid, embeddings, config, out, history;
  std::vector<std::string> overrides;
};

void cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto kind = parse_model_kind(a.model);
  if (!kind) throw Error(ErrorKind::BadConfig, "unknown model kind '" + a.model + "'");
  RunConfig config = a.config.empty() ? RunConfig::defaults(*kind) : load_run_config(a.config, *kind);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::BadConfig, "--set expects key=value, got '" + kv + "'");
    set_config_key(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (is_head(*kind) && a.embeddings.empty()) {
    throw Error(ErrorKind::BadConfig, a.model + " needs --embeddings (an EMBX file)");
  }
  const Corpus train = read_input(a.train);
  std::optional<Corpus> valid;
  if (!a.valid.empty()) valid = read_input(a.valid);
  const auto emb = read_optional_embx(a.embeddings);

  auto result = train_detector(config, train, valid ? &*valid : nullptr, emb ? &*emb : nullptr);
  save_container(a.out, result.detector);
  if (!a.history.empty()) save_loss_csv(a.history, result.history);

  if (!result.history.empty()) {
    const auto& last = result.history.epochs.back();
    out << "epoch " << last.epoch << " train_loss " << format_real(last.train_loss);
    if (last.has_valid) out << " valid_loss " << format_real(last.valid_loss);
    out << '\n';
  }
  if (const auto t = result.detector.threshold()) out << "threshold " << format_real(*t) << '\n';
}

// ---- calibrate ------------------------------------------------------------

struct CalibrateArgs {
  std::string model, valid, embeddings, out;
};

void cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  Detector d = load_container(a.model);
  const Corpus valid = read_input(a.valid);
  const auto emb = read_optional_embx(a.embeddings);
  const double t = calibrate_detector(d, valid, emb ? &*emb : nullptr);
  save_container(a.out.empty() ? a.model : a.out, d);
  out << "threshold " << format_real(t) << '\n';
}

// ---- evaluate / predict ---------------------------------------------------

struct EvaluateArgs {
  std::string model, test, embeddings, report, roc, report_csv;
};

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Detector d = load_container(a.model);
  const Corpus test = read_input(a.test);
  const auto emb = read_optional_embx(a.embeddings);
  const auto scored = score_detector(d, test, emb ? &*emb : nullptr);
  const auto labels = test.labels();
  EvalReport report = classification_report(scored.labels, labels);
  report.threshold = d.threshold();
  const bool both = test.count(ClassLabel::AI) > 0 && test.count(ClassLabel::Human) > 0;
  if (both) {
    const auto curve = roc_curve(scored.scores, labels);
    report.auc = auc(curve);
    if (!a.roc.empty()) save_roc_csv(a.roc, curve);
  } else {
    if (!a.roc.empty()) throw Error(ErrorKind::SingleClass, "ROC needs both classes in the test set");
    warn("test set has a single class; AUC omitted");
  }
  if (!a.report.empty()) save_report_json(a.report, report);
  if (!a.report_csv.empty()) save_report_csv(a.report_csv, report);
  out << "accuracy " << format_real(report.accuracy);
  if (report.auc) out << " auc " << format_real(*report.auc);
  out << '\n';
}

struct PredictArgs {
  std::string model, input, embeddings, out;
};

void cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Detector d = load_container(a.model);
  const Corpus input = read_input(a.input);
  const auto emb = read_optional_embx(a.embeddings);
  const auto scored = score_detector(d, input, emb ? &*emb : nullptr);
  std::ostringstream s;
  s << "doc_id,score,label\n";
  for (std::size_t i = 0; i < input.size(); ++i) {
    write_csv_field(s, input[i].id);
    s << ',' << format_real(scored.scores[i]) << ',' << scored.labels[i] << '\n';
  }
  write_text_file(a.out, s.str());
  out << input.size() << " predictions\n";
}

// ---- ensemble -------------------------------------------------------------

struct EnsembleArgs {
  std::vector<std::string> models, embeddings;
  std::string input, out, votes;
  bool allow_even = false;
};

void cmd_ensemble(const EnsembleArgs& a, std::ostream& out) {
  if (a.models.empty()) throw Error(ErrorKind::BadConfig, "--models needs at least one container");
  if (a.models.size() % 2 == 0 && !a.allow_even) {
    throw Error(ErrorKind::EvenKWithoutScores,
                "an even number of models needs --allow-even (ties are broken by mean score)");
  }
  const Corpus input = read_input(a.input);
  std::vector<EmbeddingSet> sets;
  for (const auto& p : a.embeddings) sets.push_back(read_embx(p));

  std::vector<std::string> stems;
  for (const auto& m : a.models) stems.push_back(fs::path(m).stem().string());
  VoteMatrix vm;
  vm.detector_ids = unique_ids(stems);
  vm.scores.emplace();
  for (std::size_t j = 0; j < a.models.size(); ++j) {
    try {
      const Detector d = load_container(a.models[j]);
      const EmbeddingSet* emb = nullptr;
      if (is_head(d.kind())) {
        const auto it = std::find_if(sets.begin(), sets.end(),
                                     [&](const EmbeddingSet& s) { return s.model_id == d.embedding_model_id(); });
        if (it != sets.end()) {
          emb = &*it;
        } else if (!sets.empty()) {
          throw Error(ErrorKind::ModelIdMismatch,
                      "no --embeddings file has model id '" + d.embedding_model_id() + "'");
        }
      }
      auto scored = score_detector(d, input, emb);
      vm.votes.push_back(std::move(scored.labels));
      vm.scores->push_back(std::move(scored.scores));
    } catch (const Error& e) {
      throw Error(e.kind(), vm.detector_ids[j] + ": " + e.what());
    }
  }
  const auto final_labels = max_vote(vm);
  const auto ids = doc_ids(input);
  std::ostringstream s;
  s << "doc_id,label\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    write_csv_field(s, ids[i]);
    s << ',' << final_labels[i] << '\n';
  }
  write_text_file(a.out, s.str());
  if (!a.votes.empty()) save_votes_csv(a.votes, ids, vm, final_labels);
  out << ids.size() << " documents, " << vm.k() << " detectors\n";
}

// ---- report / embx-info ---------------------------------------------------

struct ReportArgs {
  std::string report, csv;
};

void cmd_report(const ReportArgs& a, std::ostream& out) {
  const EvalReport r = report_from_json(read_text_file(a.report));
  if (!a.csv.empty()) save_report_csv(a.csv, r);
  char line[160];
  out << "class      precision  recall     f1         support\n";
  const char* names[2] = {"Human", "AI"};
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& m = r.classes[c];
    std::snprintf(line, sizeof line, "%-10s %-10.4f %-10.4f %-10.4f %zu\n", names[c], m.precision, m.recall, m.f1,
                  m.support);
    out << line;
  }
  for (auto [name, m] : {std::pair{"macro", &r.macro_avg}, std::pair{"weighted", &r.weighted_avg}}) {
    std::snprintf(line, sizeof line, "%-10s %-10.4f %-10.4f %-10.4f\n", name, m->precision, m->recall, m->f1);
    out << line;
  }
  std::snprintf(line, sizeof line, "accuracy   %.4f\n", r.accuracy);
  out << line;
  out << "confusion (rows true, cols predicted; Human, AI)\n";
  out << "  " << r.confusion[0][0] << ' ' << r.confusion[0][1] << "\n  " << r.confusion[1][0] << ' '
      << r.confusion[1][1] << '\n';
  if (r.auc) out << "auc " << format_real(*r.auc) << '\n';
  if (r.threshold) out << "threshold " << format_real(*r.threshold) << '\n';
}

void cmd_embx_info(const std::string& path, std::ostream& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const EmbeddingSet set = decode_embx(bytes);
  char crc[16];
  std::snprintf(crc, sizeof crc, "%08x", crc32_of(std::span(bytes).first(bytes.size() - 4)));
  out << "model_id " << set.model_id << "\ndim " << set.dim << "\ncount " << set.count() << "\ncrc32 " << crc
      << '\n';
}

int exit_code(const Error& e) { return e.kind() == ErrorKind::Io ? 1 : 2; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train, evaluate and ensemble AI-generated text detectors."};
  app.name("aidetect");
  app.require_subcommand(1);

  SplitArgs split;
  auto* s = app.add_subcommand("split", "Stratified train/test split of a labelled corpus");
  s->add_option("--input", split.input, "Corpus file (CSV or JSONL)")->required();
  s->add_option("--format", split.format, "csv or jsonl (default: from the extension)");
  s->add_option("--train-frac", split.train_frac, "Fraction of each class sent to train")->capture_default_str();
  s->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();
  s->add_option("--out-dir", split.out_dir, "Directory for train.csv and test.csv")->required();

  FeaturizeArgs feat;
  auto* f = app.add_subcommand("featurize", "Write a feature matrix CSV (doc_id,label,columns...)");
  f->add_option("--input", feat.input, "Corpus file")->required();
  f->add_option("--out", feat.out, "Feature CSV")->required();
  f->add_option("--features", feat.features, "classic (bow+tfidf+pos), bow, tfidf, pos or ngram")
      ->check(CLI::IsMember({"classic", "bow", "tfidf", "pos", "ngram"}))
      ->capture_default_str();
  f->add_option("--pos-summary", feat.pos_summary, "Also write mean POS distribution per class");
  f->add_option("--vocab-max", feat.vocab_max)->capture_default_str();
  f->add_option("--min-freq", feat.min_freq)->capture_default_str();
  f->add_option("--ngram-n-max", feat.ngram_n_max)->capture_default_str();
  f->add_option("--ngram-max", feat.ngram_max)->capture_default_str();
  f->add_option("--ngram-min-freq", feat.ngram_min_freq)->capture_default_str();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a detector and write its model container");
  t->add_option("--model", train.model, "logreg, lstm, bert-ngram, bert-custom or distilbert-head")->required();
  t->add_option("--train", train.train, "Training corpus")->required();
  t->add_option("--valid", train.valid, "Validation corpus (loss curve, threshold calibration)");
  t->add_option("--embeddings", train.embeddings, "EMBX file covering every train/valid id (head models)");
  t->add_option("--config", train.config, "key = value config file");
  t->add_option("--set", train.overrides, "Override one config key (key=value), repeatable");
  t->add_option("--out", train.out, "Model container (JSON)")->required();
  t->add_option("--history", train.history, "Loss history CSV");
  t->footer(config_help());

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Set a model's threshold by Youden's J on labelled data");
  c->add_option("--model", cal.model, "Model container")->required();
  c->add_option("--valid", cal.valid, "Labelled corpus with both classes")->required();
  c->add_option("--embeddings", cal.embeddings, "EMBX file (head models)");
  c->add_option("--out", cal.out, "Output container (default: overwrite --model)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Classification report and ROC curve on a labelled test set");
  e->add_option("--model", ev.model, "Model container")->required();
  e->add_option("--test", ev.test, "Labelled corpus")->required();
  e->add_option("--embeddings", ev.embeddings, "EMBX file (head models)");
  e->add_option("--report", ev.report, "Report JSON");
  e->add_option("--report-csv", ev.report_csv, "Report as metric,class,value CSV");
  e->add_option("--roc", ev.roc, "ROC curve CSV (fpr,tpr,threshold)");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Score documents (doc_id,score,label CSV; label 1 = AI)");
  p->add_option("--model", pr.model, "Model container")->required();
  p->add_option("--input", pr.input, "Corpus file")->required();
  p->add_option("--embeddings", pr.embeddings, "EMBX file (head models)");
  p->add_option("--out", pr.out, "Prediction CSV")->required();

  EnsembleArgs en;
  auto* n = app.add_subcommand("ensemble", "Majority vote over several model containers");
  n->add_option("--models", en.models, "Model containers")->required()->delimiter(',');
  n->add_option("--input", en.input, "Corpus file")->required();
  n->add_option("--embeddings", en.embeddings, "EMBX files; head models pick theirs by model id")->delimiter(',');
  n->add_option("--out", en.out, "Final labels CSV (doc_id,label)")->required();
  n->add_option("--votes", en.votes, "Vote matrix CSV (doc_id,<detector>...,final)");
  n->add_flag("--allow-even", en.allow_even, "Accept an even number of models; ties go to mean score >= 0.5");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Print a saved report JSON and optionally flatten it to CSV");
  r->add_option("--report", rep.report, "Report JSON from evaluate")->required();
  r->add_option("--csv", rep.csv, "metric,class,value CSV");

  std::string embx_path;
  auto* x = app.add_subcommand("embx-info", "Print model id, dimension, count and CRC-32 of an EMBX file");
  x->add_option("path", embx_path, "EMBX file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) cmd_split(split, out);
    if (f->parsed()) cmd_featurize(feat, out);
    if (t->parsed()) cmd_train(train, out);
    if (c->parsed()) cmd_calibrate(cal, out);
    if (e->parsed()) cmd_evaluate(ev, out);
    if (p->parsed()) cmd_predict(pr, out);
    if (n->parsed()) cmd_ensemble(en, out);
    if (r->parsed()) cmd_report(rep, out);
    if (x->parsed()) cmd_embx_info(embx_path, out);
  } catch (const Error& ex) {
    err << "error [" << to_string(ex.kind()) << "]: " << ex.what() << '\n';
    return exit_code(ex);
  } catch (const fs::filesystem_error& ex) {
    err << "error [Io]: " << ex.what() << '\n';
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace aidetect::cli
