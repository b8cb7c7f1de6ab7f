#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aidetect/numerics.hpp"

namespace aidetect {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // classify "score >= threshold" as AI

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Points ordered by descending threshold: the (0,0) endpoint with threshold
/// +inf first, then one point per distinct score. The last point (lowest
/// score) is always (1,1).
struct RocCurve {
  std::vector<RocPoint> points;
};

/// Throws SingleClass unless both labels occur.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

struct ThresholdChoice {
  double threshold = 0.5;
  double youden_j = 0.0;
  bool degenerate = false;
};

/// Maximizes TPR - FPR over the distinct-score cut points (ties: smaller FPR).
/// The returned threshold is the midpoint between the lowest score classified
/// AI and the next lower distinct score; a single distinct score falls back to
/// 0.5 and sets `degenerate`.
ThresholdChoice youden_threshold(const RocCurve& curve);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct AveragedMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Binary classification report. Confusion rows are true labels and columns
/// predictions, both ordered (Human, AI).
struct EvalReport {
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> classes{};  // [Human, AI]
  AveragedMetrics macro_avg;
  AveragedMetrics weighted_avg;
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::optional<double> auc;
  std::optional<double> threshold;

  const ClassMetrics& human() const { return classes[0]; }
  const ClassMetrics& ai() const { return classes[1]; }
  std::size_t total() const;
};

/// Per-class metrics with the 0/0 -> 0 convention (a warning is emitted).
/// Throws LengthMismatch.
EvalReport classification_report(std::span<const int> predictions, std::span<const int> labels);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& json);

/// 17 significant digits, '.' decimal separator.
std::string format_real(double value);

void write_roc_csv(std::ostream& out, const RocCurve& curve);
void write_loss_csv(std::ostream& out, const LossHistory& history);
void write_report_csv(std::ostream& out, const EvalReport& report);

void save_roc_csv(const std::filesystem::path& path, const RocCurve& curve);
void save_loss_csv(const std::filesystem::path& path, const LossHistory& history);
void save_report_csv(const std::filesystem::path& path, const EvalReport& report);
void save_report_json(const std::filesystem::path& path, const EvalReport& report);

/// Writes `content` to `path` in binary mode; throws Io.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace aidetect
