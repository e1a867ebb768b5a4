#include <doctest.h>

#include <atomic>
#include <cmath>

#include <nlohmann/json.hpp>

#include "fake_server.hpp"
#include "hetqa/errors.hpp"
#include "hetqa/providers.hpp"

using namespace hetqa;
using namespace hetqa::testing;
using nlohmann::json;

TEST_CASE("hashing embedder gives unit vectors of a fixed dimension") {
  HashingEmbedder emb(64);
  std::vector<std::string> texts{"Emily Blunt", "", "emily BLUNT"};
  auto v = emb.embed(texts);
  REQUIRE(v.size() == 3);
  for (const auto& x : v) {
    CHECK(x.size() == 64);
    double n = 0;
    for (double d : x) n += d * d;
    CHECK(std::abs(n - 1.0) < 1e-12);
  }
  CHECK(v[0] == v[2]);
}

TEST_CASE("lexical overlap scorer") {
  LexicalOverlapScorer s;
  std::vector<std::string> c{"Emily Blunt sibling Felicity Blunt", "Milton Friedman", ""};
  auto scores = s.score("sibling of Emily Blunt", c);
  CHECK(scores == std::vector<double>{0.75, 0.0, 0.0});
  CHECK(s.score("", c) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("base URL parsing") {
  auto ep = parse_base_url("http://127.0.0.1:8088/v1/");
  CHECK(ep.origin == "http://127.0.0.1:8088");
  CHECK(ep.path_prefix == "/v1");
  CHECK(parse_base_url("http://h").path_prefix.empty());
  CHECK_THROWS_AS(parse_base_url("localhost:80"), ProviderUnavailable);
}

TEST_CASE("/embed client batches and checks dimensions") {
  FakeServer fake;
  std::atomic<int> calls{0};
  fake.server.Post("/shim/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    auto body = json::parse(req.body);
    json vecs = json::array();
    for (const auto& t : body.at("texts")) vecs.push_back({1.0, static_cast<double>(t.get<std::string>().size())});
    res.set_content(json{{"vectors", vecs}}.dump(), "application/json");
  });
  fake.start();

  ShimOptions opts;
  opts.base_url = fake.url("/shim");
  opts.batch_cap = 2;
  HttpEmbeddingProvider emb(opts);
  std::vector<std::string> texts{"a", "bb", "ccc", "dddd", "e"};
  auto v = emb.embed(texts);
  CHECK(calls == 3);
  REQUIRE(v.size() == 5);
  CHECK(v[3] == Vector{1.0, 4.0});
}

TEST_CASE("/embed dimension mismatch and 503") {
  FakeServer fake;
  fake.server.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
    auto n = json::parse(req.body).at("texts").size();
    json vecs = json::array();
    for (std::size_t i = 0; i < n; ++i) vecs.push_back(std::vector<double>(i + 1, 1.0));
    res.set_content(json{{"vectors", vecs}}.dump(), "application/json");
  });
  fake.server.Post("/loading/embed", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("{\"error\":\"loading\"}", "application/json");
  });
  fake.start();
  ShimOptions opts;
  opts.base_url = fake.url();
  std::vector<std::string> two{"x", "y"};
  CHECK_THROWS_AS(HttpEmbeddingProvider(opts).embed(two), DimensionMismatch);
  opts.base_url = fake.url("/loading");
  CHECK_THROWS_AS(HttpEmbeddingProvider(opts).embed(two), ProviderUnavailable);
}

TEST_CASE("/rerank client returns one score per candidate") {
  FakeServer fake;
  fake.server.Post("/rerank", [](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    json scores = json::array();
    for (const auto& c : body.at("candidates")) scores.push_back(c == body.at("query") ? 10.0 : -1.0);
    res.set_content(json{{"scores", scores}}.dump(), "application/json");
  });
  fake.server.Post("/short/rerank", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"scores\":[1.0]}", "application/json");
  });
  fake.start();
  ShimOptions opts;
  opts.base_url = fake.url();
  HttpRelevanceScorer scorer(opts);
  std::vector<std::string> cands{"unrelated text", "where was david resnick born"};
  auto s = scorer.score("where was david resnick born", cands);
  REQUIRE(s.size() == 2);
  CHECK(s[1] > s[0]);
  CHECK(scorer.score("q", {}).empty());
  opts.base_url = fake.url("/short");
  CHECK_THROWS_AS(HttpRelevanceScorer(opts).score("q", cands), ProviderUnavailable);
}

TEST_CASE("/healthz") {
  FakeServer fake;
  fake.server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\",\"embed_dim\":384}", "application/json");
  });
  fake.start();
  ShimOptions opts;
  opts.base_url = fake.url();
  CHECK(shim_health(opts).at("status") == "ok");
  opts.base_url = fake.url("/missing");
  CHECK_THROWS_AS(shim_health(opts), ProviderUnavailable);
}

TEST_CASE("unreachable shim") {
  ShimOptions opts;
  opts.base_url = "http://127.0.0.1:1";
  opts.timeout = std::chrono::milliseconds(500);
  std::vector<std::string> one{"x"};
  CHECK_THROWS_AS(HttpEmbeddingProvider(opts).embed(one), ProviderUnavailable);
  CHECK_THROWS_AS(HttpRelevanceScorer(opts).score("q", one), ProviderUnavailable);
  CHECK_THROWS_AS(shim_health(opts), ProviderUnavailable);
}
