#include "aidetect/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include "aidetect/error.hpp"
#include "json.hpp"

namespace aidetect {

namespace {

double safe_div(std::size_t num, std::size_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json metrics_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

nlohmann::json averaged_json(const AveragedMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

}  // namespace

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::LengthMismatch, "scores and labels differ in length");
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorKind::SingleClass, "ROC needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1 ? tp : fp) += 1;
      ++k;
    }
    curve.points.push_back(
        {static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

ThresholdChoice youden_threshold(const RocCurve& curve) {
  // points[0] is the synthetic (0,0) endpoint; cut points start at 1.
  if (curve.points.size() <= 2) {
    warn("all scores identical; ROC threshold falls back to 0.5");
    return {0.5, 0.0, true};
  }
  std::size_t best = 1;
  double best_j = curve.points[1].tpr - curve.points[1].fpr;
  for (std::size_t i = 2; i < curve.points.size(); ++i) {
    const double j = curve.points[i].tpr - curve.points[i].fpr;
    if (j > best_j || (j == best_j && curve.points[i].fpr < curve.points[best].fpr)) {
      best = i;
      best_j = j;
    }
  }
  const double upper = curve.points[best].threshold;
  const double threshold = best + 1 < curve.points.size() ? (upper + curve.points[best + 1].threshold) / 2.0 : upper;
  return {threshold, best_j, false};
}

std::size_t EvalReport::total() const {
  return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
}

EvalReport classification_report(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "predictions and labels differ in length");
  }
  EvalReport r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i];
    const int p = predictions[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw Error(ErrorKind::InvalidLabel, "report inputs must be 0 or 1 (index " + std::to_string(i) + ")");
    }
    r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] += 1;
  }
  const std::size_t total = labels.size();
  bool degenerate = false;
  r.accuracy = safe_div(r.confusion[0][0] + r.confusion[1][1], total, degenerate);
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t other = 1 - c;
    const std::size_t tp = r.confusion[c][c];
    const std::size_t fp = r.confusion[other][c];
    const std::size_t fn = r.confusion[c][other];
    auto& m = r.classes[c];
    m.support = tp + fn;
    m.precision = safe_div(tp, tp + fp, degenerate);
    m.recall = safe_div(tp, tp + fn, degenerate);
    // 2PR/(P+R) written over counts so exact fractions stay exact.
    m.f1 = safe_div(2 * tp, 2 * tp + fp + fn, degenerate);
  }
  if (degenerate) warn("classification report has an empty class; 0/0 metrics reported as 0");
  const auto& h = r.classes[0];
  const auto& a = r.classes[1];
  r.macro_avg = {(h.precision + a.precision) / 2.0, (h.recall + a.recall) / 2.0, (h.f1 + a.f1) / 2.0};
  if (total > 0) {
    const double wh = static_cast<double>(h.support) / static_cast<double>(total);
    const double wa = static_cast<double>(a.support) / static_cast<double>(total);
    r.weighted_avg = {wh * h.precision + wa * a.precision, wh * h.recall + wa * a.recall, wh * h.f1 + wa * a.f1};
  }
  return r;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["classes"] = {{"Human", metrics_json(r.classes[0])}, {"AI", metrics_json(r.classes[1])}};
  j["macro_avg"] = averaged_json(r.macro_avg);
  j["weighted_avg"] = averaged_json(r.weighted_avg);
  j["confusion"] = {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}};
  j["auc"] = r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr);
  j["threshold"] = r.threshold ? nlohmann::json(*r.threshold) : nlohmann::json(nullptr);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  EvalReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.accuracy = j.at("accuracy").get<double>();
    const char* names[2] = {"Human", "AI"};
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& m = j.at("classes").at(names[c]);
      r.classes[c] = {m.at("precision").get<double>(), m.at("recall").get<double>(), m.at("f1").get<double>(),
                      m.at("support").get<std::size_t>()};
    }
    for (auto [key, dst] : {std::pair{"macro_avg", &r.macro_avg}, std::pair{"weighted_avg", &r.weighted_avg}}) {
      const auto& m = j.at(key);
      *dst = {m.at("precision").get<double>(), m.at("recall").get<double>(), m.at("f1").get<double>()};
    }
    for (std::size_t t = 0; t < 2; ++t) {
      for (std::size_t p = 0; p < 2; ++p) r.confusion[t][p] = j.at("confusion").at(t).at(p).get<std::size_t>();
    }
    if (!j.at("auc").is_null()) r.auc = j.at("auc").get<double>();
    if (!j.at("threshold").is_null()) r.threshold = j.at("threshold").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadContainer, std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "fpr,tpr,threshold\n";
  for (const auto& p : curve.points) {
    out << format_real(p.fpr) << ',' << format_real(p.tpr) << ',' << format_real(p.threshold) << '\n';
  }
}

void write_loss_csv(std::ostream& out, const LossHistory& history) {
  out << "epoch,train_loss,valid_loss\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << format_real(e.train_loss) << ',';
    if (e.has_valid) out << format_real(e.valid_loss);
    out << '\n';
  }
}

void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << "metric,class,value\n";
  out << "accuracy,," << format_real(r.accuracy) << '\n';
  const char* names[2] = {"Human", "AI"};
  for (std::size_t c = 0; c < 2; ++c) {
    out << "precision," << names[c] << ',' << format_real(r.classes[c].precision) << '\n';
    out << "recall," << names[c] << ',' << format_real(r.classes[c].recall) << '\n';
    out << "f1," << names[c] << ',' << format_real(r.classes[c].f1) << '\n';
    out << "support," << names[c] << ',' << r.classes[c].support << '\n';
  }
  for (auto [name, m] : {std::pair{"macro_avg", &r.macro_avg}, std::pair{"weighted_avg", &r.weighted_avg}}) {
    out << "precision," << name << ',' << format_real(m->precision) << '\n';
    out << "recall," << name << ',' << format_real(m->recall) << '\n';
    out << "f1," << name << ',' << format_real(m->f1) << '\n';
  }
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t p = 0; p < 2; ++p) {
      out << "confusion," << names[t] << "->" << names[p] << ',' << r.confusion[t][p] << '\n';
    }
  }
  if (r.auc) out << "auc,," << format_real(*r.auc) << '\n';
  if (r.threshold) out << "threshold,," << format_real(*r.threshold) << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  std::ostringstream s;
  write_roc_csv(s, curve);
  write_text_file(path, s.str());
}

void save_loss_csv(const std::filesystem::path& path, const LossHistory& history) {
  std::ostringstream s;
  write_loss_csv(s, history);
  write_text_file(path, s.str());
}

void save_report_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ostringstream s;
  write_report_csv(s, report);
  write_text_file(path, s.str());
}

void save_report_json(const std::filesystem::path& path, const EvalReport& report) {
  write_text_file(path, report_to_json(report));
}

}  // namespace aidetect
