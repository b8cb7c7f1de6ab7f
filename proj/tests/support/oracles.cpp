#include "oracles.hpp"

#include <algorithm>
#include <functional>

#include "aidetect/numerics.hpp"

namespace aidetect::testing {

std::vector<ScoredSet> random_scored_sets(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScoredSet> sets;
  while (sets.size() < count) {
    const std::size_t n = 2 + rng.uniform_index(49);
    const std::size_t grid = 2 + rng.uniform_index(20);
    ScoredSet s;
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(static_cast<double>(rng.uniform_index(grid)) / static_cast<double>(grid));
      s.labels.push_back(static_cast<int>(rng.uniform_index(2)));
    }
    const auto pos = std::count(s.labels.begin(), s.labels.end(), 1);
    if (pos == 0 || pos == static_cast<long>(n)) continue;
    sets.push_back(std::move(s));
  }
  return sets;
}

double mann_whitney_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

YoudenOracle brute_force_youden(std::span<const double> scores, std::span<const int> labels) {
  std::vector<double> cuts(scores.begin(), scores.end());
  std::sort(cuts.begin(), cuts.end(), std::greater<>());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::size_t pos = 0, neg = 0;
  for (int y : labels) (y == 1 ? pos : neg) += 1;

  std::size_t best = 0;
  double best_j = 0.0, best_fpr = 0.0;
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= cuts[c]) (labels[i] == 1 ? tp : fp) += 1;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    const double j = tpr - fpr;
    if (c == 0 || j > best_j || (j == best_j && fpr < best_fpr)) {
      best = c;
      best_j = j;
      best_fpr = fpr;
    }
  }
  const double t = best + 1 < cuts.size() ? (cuts[best] + cuts[best + 1]) / 2.0 : cuts[best];
  return {t, best_j};
}

std::vector<int> brute_force_majority(const std::vector<std::vector<int>>& votes) {
  std::vector<int> out(votes.front().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t ai = 0;
    for (const auto& row : votes) ai += row[i] == 1;
    const std::size_t human = votes.size() - ai;
    out[i] = ai > human ? 1 : (human > ai ? 0 : -1);
  }
  return out;
}

}  // namespace aidetect::testing
