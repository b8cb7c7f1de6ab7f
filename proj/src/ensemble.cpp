#include "aidetect/ensemble.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "aidetect/corpus.hpp"
#include "aidetect/error.hpp"
#include "aidetect/evaluation.hpp"

namespace aidetect {

void validate(const VoteMatrix& vm) {
  if (vm.k() == 0) throw Error(ErrorKind::ShapeMismatch, "vote matrix has no detectors");
  if (vm.detector_ids.size() != vm.k()) throw Error(ErrorKind::ShapeMismatch, "one detector id per vote row required");
  const std::size_t n = vm.n();
  for (const auto& row : vm.votes) {
    if (row.size() != n) throw Error(ErrorKind::ShapeMismatch, "vote rows differ in length");
    for (int v : row) {
      if (v != 0 && v != 1) throw Error(ErrorKind::InvalidLabel, "votes must be 0 or 1");
    }
  }
  if (vm.scores) {
    if (vm.scores->size() != vm.k()) throw Error(ErrorKind::ShapeMismatch, "score rows do not match vote rows");
    for (const auto& row : *vm.scores) {
      if (row.size() != n) throw Error(ErrorKind::ShapeMismatch, "score rows differ in length");
    }
  }
}

std::vector<int> max_vote(const VoteMatrix& vm) {
  validate(vm);
  const std::size_t k = vm.k();
  if (k % 2 == 0 && !vm.scores) {
    throw Error(ErrorKind::EvenKWithoutScores, "an even number of detectors needs scores to break ties");
  }
  std::vector<int> out(vm.n());
  for (std::size_t d = 0; d < vm.n(); ++d) {
    std::size_t ai = 0;
    for (std::size_t j = 0; j < k; ++j) ai += static_cast<std::size_t>(vm.votes[j][d]);
    if (2 * ai > k) {
      out[d] = 1;
    } else if (2 * ai < k) {
      out[d] = 0;
    } else {
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += (*vm.scores)[j][d];
      out[d] = sum / static_cast<double>(k) >= 0.5 ? 1 : 0;
    }
  }
  return out;
}

std::vector<std::string> unique_ids(std::span<const std::string> ids) {
  std::vector<std::string> out;
  std::unordered_set<std::string> taken;
  std::unordered_map<std::string, int> next;
  for (const auto& id : ids) {
    std::string candidate = id;
    if (taken.contains(candidate)) {
      int& n = next.try_emplace(id, 2).first->second;
      do {
        candidate = id + "_" + std::to_string(n++);
      } while (taken.contains(candidate));
    }
    taken.insert(candidate);
    out.push_back(std::move(candidate));
  }
  return out;
}

void write_votes_csv(std::ostream& out, std::span<const std::string> doc_ids, const VoteMatrix& vm,
                     std::span<const int> final_labels) {
  validate(vm);
  if (doc_ids.size() != vm.n() || final_labels.size() != vm.n()) {
    throw Error(ErrorKind::LengthMismatch, "doc ids, votes and final labels differ in length");
  }
  out << "doc_id";
  for (const auto& id : vm.detector_ids) {
    out << ',';
    write_csv_field(out, id);
  }
  out << ",final\n";
  for (std::size_t d = 0; d < vm.n(); ++d) {
    write_csv_field(out, doc_ids[d]);
    for (std::size_t j = 0; j < vm.k(); ++j) out << ',' << vm.votes[j][d];
    out << ',' << final_labels[d] << '\n';
  }
}

void save_votes_csv(const std::filesystem::path& path, std::span<const std::string> doc_ids, const VoteMatrix& vm,
                    std::span<const int> final_labels) {
  std::ostringstream s;
  write_votes_csv(s, doc_ids, vm, final_labels);
  write_text_file(path, s.str());
}

}  // namespace aidetect
