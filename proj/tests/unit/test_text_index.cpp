#include <doctest.h>

#include <cmath>

#include "hetqa/errors.hpp"
#include "hetqa/text_index.hpp"
#include "oracles.hpp"

using namespace hetqa;
using namespace hetqa::testing;

namespace {

std::vector<Passage> three_docs() {
  return {Passage{"d1", "", "emily blunt sibling felicity blunt"},
          Passage{"d2", "", "emily blunt spouse john krasinski"},
          Passage{"d3", "", "milton friedman award received nobel"}};
}

// Returns fixed vectors for known texts, zero-free.
class TableEmbedder final : public EmbeddingProvider {
 public:
  std::vector<Vector> embed(std::span<const std::string> texts) override {
    ++calls;
    std::vector<Vector> out;
    for (const auto& t : texts) out.push_back(t == "a" ? Vector{1, 0} : t == "b" ? Vector{0, 3} : Vector{1, 1});
    return out;
  }
  std::string name() const override { return "table"; }
  int calls = 0;
};

class DownEmbedder final : public EmbeddingProvider {
 public:
  std::vector<Vector> embed(std::span<const std::string>) override { throw ProviderUnavailable("down"); }
  std::string name() const override { return "down"; }
};

class RaggedEmbedder final : public EmbeddingProvider {
 public:
  std::vector<Vector> embed(std::span<const std::string> texts) override {
    std::vector<Vector> out;
    for (std::size_t i = 0; i < texts.size(); ++i) out.push_back(Vector(2 + i, 1.0));
    return out;
  }
  std::string name() const override { return "ragged"; }
};

}  // namespace

TEST_CASE("bm25 on the three-document corpus") {
  auto idx = SparseIndex::build(three_docs());
  CHECK(idx.doc_count() == 3);
  auto hits = idx.search("sibling of emily blunt", 2);
  REQUIRE(hits.size() == 1);  // emily/blunt have idf 0 at df=2 of 3
  CHECK(hits[0].passage_id == "d1");
  auto ref = bm25_reference({{"d1", three_docs()[0].body}, {"d2", three_docs()[1].body}, {"d3", three_docs()[2].body}},
                            "sibling of emily blunt");
  CHECK(std::abs(hits[0].score - ref[0]) < 1e-9);
  CHECK(idx.search("zebra", 3).empty());
  CHECK(idx.idf("emily") == 0.0);
  CHECK(idx.idf("nobel") == doctest::Approx(std::log(2.5 / 1.5)));
  CHECK_THROWS_AS(idx.search("x", 0), PreconditionViolation);
}

TEST_CASE("postings hold hand-counted term frequencies") {
  auto idx = SparseIndex::build(three_docs());
  const auto* blunt = idx.postings("blunt");
  REQUIRE(blunt);
  CHECK(blunt->docs == std::vector<std::uint32_t>{0, 1});
  CHECK(blunt->tfs == std::vector<std::uint32_t>{2, 1});
  CHECK(idx.doc_lengths() == std::vector<std::uint32_t>{5, 5, 5});
  CHECK(idx.avg_doc_length() == 5.0);
}

TEST_CASE("empty corpus and duplicate ids") {
  auto idx = SparseIndex::build({});
  CHECK(idx.doc_count() == 0);
  CHECK(idx.search("anything", 3).empty());
  auto dup = three_docs();
  dup[2].id = "d1";
  CHECK_THROWS_AS(SparseIndex::build(dup), DuplicateId);
}

TEST_CASE("random corpora: results match the reference and skip non-matching docs") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 100; ++round) {
    std::vector<Passage> corpus;
    std::vector<Bm25Doc> ref_docs;
    std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      auto text = random_text(rng, 10);
      corpus.push_back(Passage{"p" + std::to_string(i), "", text});
      ref_docs.push_back({corpus.back().id, text});
    }
    auto query = random_text(rng, 4);
    auto idx = SparseIndex::build(corpus);
    auto ref = bm25_reference(ref_docs, query);
    auto hits = idx.search(query, n);
    for (std::size_t h = 0; h < hits.size(); ++h) {
      auto d = std::stoul(hits[h].passage_id.substr(1));
      CHECK(hits[h].score > 0.0);
      CHECK(std::abs(hits[h].score - ref[d]) < 1e-9);
      if (h > 0) CHECK(hits[h - 1].score >= hits[h].score);
    }
    std::size_t positive = std::count_if(ref.begin(), ref.end(), [](double s) { return s > 0; });
    CHECK(hits.size() == positive);
    CHECK(idx.search(query, n, kernels::Exec::serial).size() == hits.size());
  }
}

TEST_CASE("sparse index survives a JSON round trip") {
  auto idx = SparseIndex::build(three_docs());
  auto back = SparseIndex::from_json(idx.to_json());
  auto a = idx.search("felicity blunt nobel", 3), b = back.search("felicity blunt nobel", 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].passage_id == b[i].passage_id);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("dense index normalizes and scans exactly") {
  TableEmbedder emb;
  auto idx = DenseIndex::build({Passage{"pa", "", "a"}, Passage{"pb", "", "b"}}, emb);
  CHECK(idx.size() == 2);
  CHECK(idx.dimension() == 2);
  CHECK(idx.vector(1)[1] == doctest::Approx(1.0));
  auto hits = idx.search("a", 2, emb);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].passage_id == "pa");
  CHECK(hits[0].score == doctest::Approx(1.0));
  CHECK(hits[1].score == doctest::Approx(0.0));
  auto back = DenseIndex::from_json(idx.to_json());
  CHECK(back.search_vector({0, 1}, 1)[0].passage_id == "pb");
}

TEST_CASE("dense index errors") {
  DownEmbedder down;
  CHECK_THROWS_AS(DenseIndex::build({Passage{"p", "", "x"}}, down), ProviderUnavailable);
  RaggedEmbedder ragged;
  CHECK_THROWS_AS(DenseIndex::build({Passage{"p", "", "x"}, Passage{"q", "", "y"}}, ragged), DimensionMismatch);
}

TEST_CASE("hashing embedder self-retrieval on the fixture passages") {
  auto corpus = load_passages(data_dir() / "fixture" / "passages.jsonl");
  HashingEmbedder emb;
  auto idx = DenseIndex::build(corpus, emb, 2);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    double norm = 0;
    for (double x : idx.vector(i)) norm += x * x;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
  }
  for (const auto& p : corpus) {
    auto hits = idx.search(p.body, 1, emb);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].passage_id == p.id);
  }
}

TEST_CASE("linearized triples") {
  TripleStore::Builder b;
  b.add_entity({EntityId(193458), "Emily Blunt", "", {}, std::nullopt});
  b.add_entity({EntityId(900301), "Felicity Blunt", "", {}, std::nullopt});
  b.add_relation({RelationId(3373), "sibling", {}});
  b.add_relation({RelationId(1), "count", {}});
  b.add_triple({EntityId(193458), RelationId(3373), EntityId(900301)});
  b.add_triple({EntityId(193458), RelationId(1), Literal{"3"}});
  auto store = std::move(b).build();
  auto p = linearize(store.triples()[1], store);
  CHECK(p.body == "Emily Blunt sibling Felicity Blunt");
  CHECK(p.origin == PassageOrigin::linearized_triple);
  CHECK(p.id == "kb:Q193458|P3373|Q900301");
  CHECK(linearize(store.triples()[0], store).body == "Emily Blunt count 3");
  CHECK(linearize_all(store).size() == 2);
  CHECK(linearize(store.triples()[1], store).id == p.id);
}
