#include "hetqa/providers.hpp"

#include <cmath>
#include <set>

#include <httplib.h>

#include "hetqa/errors.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

httplib::Client make_client(const HttpEndpoint& ep, std::chrono::milliseconds timeout) {
  httplib::Client cli(ep.origin);
  auto secs = timeout.count() / 1000;
  auto usecs = (timeout.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  return cli;
}

json post_json(const ShimOptions& opts, const std::string& route, const json& body) {
  auto ep = parse_base_url(opts.base_url);
  auto cli = make_client(ep, opts.timeout);
  auto res = cli.Post(ep.path_prefix + route, body.dump(), "application/json");
  if (!res) throw ProviderUnavailable(route + ": " + httplib::to_string(res.error()));
  if (res->status == 503) throw ProviderUnavailable(route + ": model loading (503)");
  if (res->status != 200)
    throw ProviderUnavailable(route + ": HTTP " + std::to_string(res->status) + " " + res->body);
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw ProviderUnavailable(route + ": invalid JSON response");
  }
}

}  // namespace

double normalize_in_place(Vector& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  double norm = std::sqrt(sq);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
  return norm;
}

std::vector<Vector> HashingEmbedder::embed(std::span<const std::string> texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Vector v(dim_, 0.0);
    for (const auto& tok : tokenize(text)) {
      auto h = fnv1a(tok);
      v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
    }
    if (normalize_in_place(v) == 0.0) {
      // empty or fully cancelled text maps to a fixed unit vector
      std::fill(v.begin(), v.end(), 0.0);
      v[0] = 1.0;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> LexicalOverlapScorer::score(const std::string& query,
                                                std::span<const std::string> candidates) {
  auto qt = tokenize(query);
  std::set<std::string> qs(qt.begin(), qt.end());
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (qs.empty()) {
      out.push_back(0.0);
      continue;
    }
    auto ct = tokenize(c);
    std::set<std::string> cs(ct.begin(), ct.end());
    std::size_t hit = 0;
    for (const auto& t : qs) hit += cs.count(t);
    out.push_back(static_cast<double>(hit) / static_cast<double>(qs.size()));
  }
  return out;
}

HttpEndpoint parse_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ProviderUnavailable("base URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  HttpEndpoint ep;
  if (path_start == std::string::npos) {
    ep.origin = url;
  } else {
    ep.origin = url.substr(0, path_start);
    ep.path_prefix = url.substr(path_start);
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  }
  return ep;
}

std::vector<Vector> HttpEmbeddingProvider::embed(std::span<const std::string> texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  std::size_t dim = 0;
  for (std::size_t start = 0; start < texts.size(); start += opts_.batch_cap) {
    auto batch = texts.subspan(start, std::min(opts_.batch_cap, texts.size() - start));
    json body{{"texts", std::vector<std::string>(batch.begin(), batch.end())}};
    auto res = post_json(opts_, "/embed", body);
    if (!res.contains("vectors") || !res["vectors"].is_array() || res["vectors"].size() != batch.size())
      throw DimensionMismatch("/embed returned a misaligned vector list");
    for (const auto& jv : res["vectors"]) {
      auto v = jv.get<Vector>();
      if (dim == 0) dim = v.size();
      if (v.empty() || v.size() != dim) throw DimensionMismatch("/embed returned inconsistent dimensions");
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<double> HttpRelevanceScorer::score(const std::string& query,
                                               std::span<const std::string> candidates) {
  if (candidates.empty()) return {};
  json body{{"query", query},
            {"candidates", std::vector<std::string>(candidates.begin(), candidates.end())}};
  auto res = post_json(opts_, "/rerank", body);
  if (!res.contains("scores") || !res["scores"].is_array() || res["scores"].size() != candidates.size())
    throw ProviderUnavailable("/rerank returned a misaligned score list");
  return res["scores"].get<std::vector<double>>();
}

json shim_health(const ShimOptions& opts) {
  auto ep = parse_base_url(opts.base_url);
  auto cli = make_client(ep, opts.timeout);
  auto res = cli.Get(ep.path_prefix + "/healthz");
  if (!res) throw ProviderUnavailable("/healthz: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProviderUnavailable("/healthz: HTTP " + std::to_string(res->status));
  return json::parse(res->body);
}

}  // namespace hetqa
