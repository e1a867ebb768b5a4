#include <doctest.h>

#include <cstring>
#include <random>

#include "hetqa/kernels.hpp"

using namespace hetqa::kernels;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("bm25 serial and OpenMP kernels agree bit for bit") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 20; ++round) {
    std::size_t docs = 1 + rng() % 3000;
    std::vector<std::uint32_t> lengths(docs);
    double total = 0;
    for (auto& l : lengths) total += (l = 1 + rng() % 60);
    std::size_t nterms = 1 + rng() % 6;
    std::vector<std::vector<std::uint32_t>> dids(nterms), tfs(nterms);
    std::vector<TermPostings> terms;
    for (std::size_t t = 0; t < nterms; ++t) {
      for (std::uint32_t d = 0; d < docs; ++d)
        if (rng() % 4 == 0) {
          dids[t].push_back(d);
          tfs[t].push_back(1 + rng() % 5);
        }
      terms.push_back({std::uniform_real_distribution<double>(0, 3)(rng), dids[t], tfs[t]});
    }
    std::vector<double> a(docs, -1.0), b(docs, -2.0);
    bm25_serial(terms, lengths, total / docs, {}, a);
    bm25_omp(terms, lengths, total / docs, {}, b);
    CHECK(bitwise_equal(a, b));
    for (std::uint32_t d = 0; d < docs; ++d) {
      bool any = false;
      for (const auto& v : dids) any |= std::binary_search(v.begin(), v.end(), d);
      if (!any) CHECK(a[d] == 0.0);
    }
  }
}

TEST_CASE("dot scan serial and OpenMP kernels agree bit for bit") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (std::size_t rows : {0, 1, 7, 4096}) {
    const std::size_t dim = 33;
    std::vector<double> m(rows * dim), q(dim);
    for (auto& x : m) x = g(rng);
    for (auto& x : q) x = g(rng);
    std::vector<double> a(rows), b(rows);
    dot_scan_serial(m, dim, q, a);
    dot_scan_omp(m, dim, q, b);
    CHECK(bitwise_equal(a, b));
    if (rows > 0) {
      double expect = 0;
      for (std::size_t i = 0; i < dim; ++i) expect += m[i] * q[i];
      CHECK(a[0] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}
