// Serial reference vs OpenMP kernels, plus batch scoring through both paths.
// Usage: aidetect_bench [repeats]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>

#include "aidetect/heads.hpp"
#include "aidetect/kernels.hpp"
#include "aidetect/text_features.hpp"

using namespace aidetect;

namespace {

double best_ms(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

Tensor2 random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor2 m(rows, cols);
  for (double& x : m.values()) x = rng.normal(0.0, 1.0);
  return m;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-34s %10.2f %10.2f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "bitwise equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  Rng rng(1);
  std::printf("threads: %d, best of %d runs\n", kernels::max_threads(), repeats);
  std::printf("%-34s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  for (std::size_t n : {128u, 256u, 512u}) {
    const Tensor2 a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
    Tensor2 c1(n, n), c2(n, n);
    const double s = best_ms(repeats, [&] { kernels::serial::gemm_nt(a.view(), b.view(), c1.view()); });
    const double p = best_ms(repeats, [&] { kernels::omp::gemm_nt(a.view(), b.view(), c2.view()); });
    char name[64];
    std::snprintf(name, sizeof name, "gemm_nt %zux%zu", n, n);
    row(name, s, p, c1 == c2);

    Tensor2 d1(n, n), d2(n, n);
    const double s2 = best_ms(repeats, [&] { kernels::serial::gemm_nn(a.view(), b.view(), d1.view()); });
    const double p2 = best_ms(repeats, [&] { kernels::omp::gemm_nn(a.view(), b.view(), d2.view()); });
    std::snprintf(name, sizeof name, "gemm_nn %zux%zu", n, n);
    row(name, s2, p2, d1 == d2);

    Tensor2 g1(n, n), g2(n, n);
    const double s3 = best_ms(repeats, [&] { kernels::serial::gemm_tn_acc(a.view(), b.view(), g1.view()); });
    const double p3 = best_ms(repeats, [&] { kernels::omp::gemm_tn_acc(a.view(), b.view(), g2.view()); });
    std::snprintf(name, sizeof name, "gemm_tn_acc %zux%zu", n, n);
    row(name, s3, p3, g1 == g2);
  }

  {
    const std::size_t n = 4096, dim = 768;
    const Tensor2 emb = random_matrix(n, dim, rng);
    HeadModel m = HeadModel::create(HeadKind::DistilbertHead, dim);
    m.initialize(rng);
    Tensor2 s1, p1;
    const double s = best_ms(repeats, [&] { s1 = head_forward(m, HeadInputs{emb, nullptr}, Exec::Serial); });
    const double p = best_ms(repeats, [&] { p1 = head_forward(m, HeadInputs{emb, nullptr}, Exec::Parallel); });
    row("distilbert-head forward 4096x768", s, p, s1 == p1);
  }

  {
    std::vector<Tokens> docs(20000);
    for (auto& d : docs) {
      for (int t = 0; t < 60; ++t) d.push_back("w" + std::to_string(rng.uniform_index(3000)));
    }
    const Vocabulary v = build_vocabulary(docs, CleaningProfile::classic(), 5000, 1);
    TfidfResult s1, p1;
    const double s = best_ms(repeats, [&] { s1 = tfidf(docs, v, Exec::Serial); });
    const double p = best_ms(repeats, [&] { p1 = tfidf(docs, v, Exec::Parallel); });
    row("tf-idf 20000 docs x 3000 terms", s, p, s1.matrix.data == p1.matrix.data);
  }
  return 0;
}
