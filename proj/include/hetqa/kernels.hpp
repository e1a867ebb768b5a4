#pragma once

// Scoring kernels behind the retrievers. Each kernel has a serial reference
// and an OpenMP version; both must produce bit-identical scores (the
// per-document accumulation order is the same), which the unit tests check.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hetqa::kernels {

enum class Exec { serial, parallel };

// One posting list for a query term, sorted by doc index.
struct TermPostings {
  double idf = 0.0;
  std::span<const std::uint32_t> docs;
  std::span<const std::uint32_t> tfs;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// scores[d] = sum over terms of idf * tf*(k1+1) / (tf + k1*(1 - b + b*len[d]/avgdl)).
// Documents matching no term get exactly 0.
void bm25_serial(std::span<const TermPostings> terms, std::span<const std::uint32_t> doc_lengths,
                 double avg_doc_length, Bm25Params params, std::span<double> scores);
void bm25_omp(std::span<const TermPostings> terms, std::span<const std::uint32_t> doc_lengths,
              double avg_doc_length, Bm25Params params, std::span<double> scores);

// out[i] = dot(matrix row i, query); rows are contiguous with stride dim.
void dot_scan_serial(std::span<const double> matrix, std::size_t dim, std::span<const double> query,
                     std::span<double> out);
void dot_scan_omp(std::span<const double> matrix, std::size_t dim, std::span<const double> query,
                  std::span<double> out);

inline void bm25(Exec exec, std::span<const TermPostings> terms,
                 std::span<const std::uint32_t> doc_lengths, double avg, Bm25Params params,
                 std::span<double> scores) {
  exec == Exec::parallel ? bm25_omp(terms, doc_lengths, avg, params, scores)
                         : bm25_serial(terms, doc_lengths, avg, params, scores);
}

inline void dot_scan(Exec exec, std::span<const double> matrix, std::size_t dim,
                     std::span<const double> query, std::span<double> out) {
  exec == Exec::parallel ? dot_scan_omp(matrix, dim, query, out)
                         : dot_scan_serial(matrix, dim, query, out);
}

}  // namespace hetqa::kernels
