// Serial reference vs OpenMP for the two retrieval kernels.
//   hetqa_bench --benchmark_filter=bm25

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hetqa/kernels.hpp"

using namespace hetqa::kernels;

namespace {

struct Bm25Corpus {
  std::vector<std::uint32_t> lengths;
  std::vector<std::vector<std::uint32_t>> docs, tfs;
  std::vector<TermPostings> terms;
  double avg = 0.0;
};

// Zipf-ish posting lists: term t appears in roughly n / (t + 2) documents.
Bm25Corpus make_corpus(std::size_t n, std::size_t n_terms) {
  std::mt19937_64 rng(42);
  Bm25Corpus c;
  c.lengths.resize(n);
  for (auto& l : c.lengths) l = 20 + rng() % 200;
  for (auto l : c.lengths) c.avg += l;
  c.avg /= static_cast<double>(n);
  c.docs.resize(n_terms);
  c.tfs.resize(n_terms);
  for (std::size_t t = 0; t < n_terms; ++t) {
    for (std::uint32_t d = 0; d < n; ++d) {
      if (rng() % (t + 2) != 0) continue;
      c.docs[t].push_back(d);
      c.tfs[t].push_back(1 + rng() % 5);
    }
    c.terms.push_back({1.0 + 0.1 * static_cast<double>(t), c.docs[t], c.tfs[t]});
  }
  return c;
}

template <Exec E>
void BM_bm25(benchmark::State& state) {
  auto c = make_corpus(static_cast<std::size_t>(state.range(0)), 6);
  std::vector<double> scores(c.lengths.size());
  for (auto _ : state) {
    bm25(E, c.terms, c.lengths, c.avg, {}, scores);
    benchmark::DoNotOptimize(scores.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Exec E>
void BM_dot_scan(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0)), dim = 256;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<double> matrix(n * dim), query(dim), out(n);
  for (auto& x : matrix) x = g(rng);
  for (auto& x : query) x = g(rng);
  for (auto _ : state) {
    dot_scan(E, matrix, dim, query, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_bm25<Exec::serial>)->Name("bm25/serial")->Range(1 << 10, 1 << 18);
BENCHMARK(BM_bm25<Exec::parallel>)->Name("bm25/omp")->Range(1 << 10, 1 << 18);
BENCHMARK(BM_dot_scan<Exec::serial>)->Name("dot_scan/serial")->Range(1 << 10, 1 << 16);
BENCHMARK(BM_dot_scan<Exec::parallel>)->Name("dot_scan/omp")->Range(1 << 10, 1 << 16);

BENCHMARK_MAIN();
