#include "hetqa/kernels.hpp"

#include <algorithm>

#include <omp.h>

namespace hetqa::kernels {

namespace {

inline double term_weight(double idf, double tf, double len, double avg, Bm25Params p) {
  double norm = avg > 0.0 ? len / avg : 0.0;
  return idf * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

}  // namespace

void bm25_serial(std::span<const TermPostings> terms, std::span<const std::uint32_t> doc_lengths,
                 double avg_doc_length, Bm25Params params, std::span<double> scores) {
  std::fill(scores.begin(), scores.end(), 0.0);
  // term-at-a-time
  for (const auto& t : terms) {
    for (std::size_t i = 0; i < t.docs.size(); ++i) {
      auto d = t.docs[i];
      scores[d] += term_weight(t.idf, t.tfs[i], doc_lengths[d], avg_doc_length, params);
    }
  }
}

void bm25_omp(std::span<const TermPostings> terms, std::span<const std::uint32_t> doc_lengths,
              double avg_doc_length, Bm25Params params, std::span<double> scores) {
  const auto n = static_cast<std::uint32_t>(scores.size());
  // Each thread owns a contiguous doc block and walks every posting list
  // over that block, terms in serial order, so per-doc sums match exactly.
  #pragma omp parallel
  {
    const auto nt = static_cast<std::uint32_t>(omp_get_num_threads());
    const auto id = static_cast<std::uint32_t>(omp_get_thread_num());
    const std::uint32_t chunk = (n + nt - 1) / nt;
    const std::uint32_t lo = std::min(n, id * chunk), hi = std::min(n, lo + chunk);
    std::fill(scores.begin() + lo, scores.begin() + hi, 0.0);
    for (const auto& t : terms) {
      auto i = static_cast<std::size_t>(std::lower_bound(t.docs.begin(), t.docs.end(), lo) - t.docs.begin());
      for (; i < t.docs.size() && t.docs[i] < hi; ++i) {
        auto d = t.docs[i];
        scores[d] += term_weight(t.idf, t.tfs[i], doc_lengths[d], avg_doc_length, params);
      }
    }
  }
}

void dot_scan_serial(std::span<const double> matrix, std::size_t dim, std::span<const double> query,
                     std::span<double> out) {
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* row = matrix.data() + r * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) acc += row[j] * query[j];
    out[r] = acc;
  }
}

void dot_scan_omp(std::span<const double> matrix, std::size_t dim, std::span<const double> query,
                  std::span<double> out) {
  const auto rows = static_cast<std::int64_t>(out.size());
  const double* q = query.data();
  #pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* row = matrix.data() + static_cast<std::size_t>(r) * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) acc += row[j] * q[j];
    out[r] = acc;
  }
}

}  // namespace hetqa::kernels
