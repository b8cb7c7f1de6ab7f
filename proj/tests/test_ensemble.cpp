#include <algorithm>
#include <sstream>

#include "aidetect/ensemble.hpp"
#include "aidetect/numerics.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace aidetect;

namespace {

VoteMatrix matrix_of(std::vector<std::vector<int>> votes) {
  VoteMatrix vm;
  for (std::size_t i = 0; i < votes.size(); ++i) vm.detector_ids.push_back("d" + std::to_string(i));
  vm.votes = std::move(votes);
  return vm;
}

}  // namespace

TEST_CASE("all eight three-detector patterns match the brute-force majority") {
  for (int pattern = 0; pattern < 8; ++pattern) {
    const VoteMatrix vm = matrix_of({{pattern & 1}, {(pattern >> 1) & 1}, {(pattern >> 2) & 1}});
    CHECK(max_vote(vm) == testing::brute_force_majority(vm.votes));
  }
}

TEST_CASE("examples") {
  CHECK(max_vote(matrix_of({{1, 0}, {1, 0}, {0, 1}})) == std::vector<int>{1, 0});
  CHECK(max_vote(matrix_of({{0}, {1}, {1}})) == std::vector<int>{1});
  CHECK(max_vote(matrix_of({{1, 0, 1}})) == std::vector<int>{1, 0, 1});
}

TEST_CASE("even k needs scores to break ties") {
  VoteMatrix vm = matrix_of({{1, 1, 0}, {0, 1, 1}});
  CHECK_THROWS_KIND(max_vote(vm), ErrorKind::EvenKWithoutScores);
  vm.scores = std::vector<std::vector<double>>{{0.9, 0.8, 0.1}, {0.2, 0.7, 0.6}};
  // Column 0: mean 0.55 -> AI. Column 1: agreement. Column 2: mean 0.35 -> Human.
  CHECK(max_vote(vm) == std::vector<int>{1, 1, 0});
  vm.scores = std::vector<std::vector<double>>{{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
  CHECK(max_vote(vm) == std::vector<int>{1, 1, 1});
}

TEST_CASE("validation") {
  CHECK_THROWS_KIND(max_vote(matrix_of({{1, 0}, {1}})), ErrorKind::ShapeMismatch);
  CHECK_THROWS_KIND(max_vote(matrix_of({{1, 2}, {1, 0}, {0, 0}})), ErrorKind::InvalidLabel);
  VoteMatrix ids = matrix_of({{1}});
  ids.detector_ids.clear();
  CHECK_THROWS_KIND(validate(ids), ErrorKind::ShapeMismatch);
  VoteMatrix bad_scores = matrix_of({{1}, {0}});
  bad_scores.scores = std::vector<std::vector<double>>{{0.5}};
  CHECK_THROWS_KIND(validate(bad_scores), ErrorKind::ShapeMismatch);
}

TEST_CASE("permuting detectors and flipping all votes behave as expected") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + 2 * rng.uniform_index(4);
    const std::size_t n = 1 + rng.uniform_index(20);
    std::vector<std::vector<int>> votes(k, std::vector<int>(n));
    for (auto& row : votes) {
      for (int& v : row) v = static_cast<int>(rng.uniform_index(2));
    }
    const auto base = max_vote(matrix_of(votes));
    CHECK(base == testing::brute_force_majority(votes));

    auto shuffled = votes;
    rng.shuffle(shuffled);
    CHECK(max_vote(matrix_of(shuffled)) == base);

    auto flipped = votes;
    for (auto& row : flipped) {
      for (int& v : row) v = 1 - v;
    }
    const auto fl = max_vote(matrix_of(flipped));
    for (std::size_t i = 0; i < n; ++i) CHECK(fl[i] == 1 - base[i]);

    const auto unanimous = max_vote(matrix_of(std::vector<std::vector<int>>(k, votes[0])));
    CHECK(unanimous == votes[0]);
  }
}

TEST_CASE("unique ids") {
  const std::vector<std::string> ids = {"m", "m", "x", "m"};
  CHECK(unique_ids(ids) == std::vector<std::string>{"m", "m_2", "x", "m_3"});
}

TEST_CASE("votes csv") {
  VoteMatrix vm = matrix_of({{1, 0}, {1, 1}, {0, 0}});
  const std::vector<std::string> docs = {"a", "b,c"};
  const auto final_labels = max_vote(vm);
  std::ostringstream out;
  write_votes_csv(out, docs, vm, final_labels);
  CHECK(out.str() == "doc_id,d0,d1,d2,final\na,1,1,0,1\n\"b,c\",0,1,0,0\n");
}
