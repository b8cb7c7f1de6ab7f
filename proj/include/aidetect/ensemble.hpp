#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace aidetect {

/// k detectors x n documents of hard votes, with optional P(AI) scores.
struct VoteMatrix {
  std::vector<std::string> detector_ids;
  std::vector<std::vector<int>> votes;
  std::optional<std::vector<std::vector<double>>> scores;

  std::size_t k() const noexcept { return votes.size(); }
  std::size_t n() const noexcept { return votes.empty() ? 0 : votes.front().size(); }
};

/// Throws ShapeMismatch on ragged rows or bad ids, InvalidLabel on non-binary
/// votes.
void validate(const VoteMatrix& vm);

/// Majority per document. Even-k ties go to AI when the mean score is >= 0.5;
/// even k without scores throws EvenKWithoutScores.
std::vector<int> max_vote(const VoteMatrix& vm);

/// Makes detector ids unique by suffixing _2, _3, ... on repeats.
std::vector<std::string> unique_ids(std::span<const std::string> ids);

/// Columns: doc_id, one per detector, final.
void write_votes_csv(std::ostream& out, std::span<const std::string> doc_ids, const VoteMatrix& vm,
                     std::span<const int> final_labels);
void save_votes_csv(const std::filesystem::path& path, std::span<const std::string> doc_ids, const VoteMatrix& vm,
                    std::span<const int> final_labels);

}  // namespace aidetect
