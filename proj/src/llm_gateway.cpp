#include "hetqa/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hetqa/errors.hpp"
#include "hetqa/providers.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa::llm {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

GenerationResponse generate(const GenerationRequest& request, Provider& provider) {
  if (request.n_samples < 1) throw PreconditionViolation("n_samples must be >= 1");
  if (request.max_tokens < 1) throw PreconditionViolation("max_tokens must be >= 1");
  if (request.temperature < 0.0) throw PreconditionViolation("temperature must be >= 0");
  auto digest = sha256_hex(request.prompt);
  spdlog::debug("llm {} prompt {} t={} n={}", provider.name(), digest, request.temperature, request.n_samples);
  auto start = Clock::now();
  auto resp = provider.generate(request);
  if (resp.samples.size() != static_cast<std::size_t>(request.n_samples))
    throw ProviderUnavailable(provider.name() + " returned " + std::to_string(resp.samples.size()) +
                              " samples, expected " + std::to_string(request.n_samples));
  if (resp.prompt_digest.empty()) resp.prompt_digest = digest;
  if (resp.prompt_digest != digest) throw Error("provider altered the prompt (digest mismatch)");
  if (resp.provider_name.empty()) resp.provider_name = provider.name();
  resp.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return resp;
}

// ----- scripted ------------------------------------------------------------

std::vector<ScriptedEntry> load_scripted_entries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord(path.string(), 0, "cannot open fixture");
  std::vector<ScriptedEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      ScriptedEntry e;
      if (j.contains("digest") && j["digest"].is_string()) e.digest = j["digest"].get<std::string>();
      if (j.contains("matcher") && j["matcher"].is_string()) e.matcher = j["matcher"].get<std::string>();
      e.responses = j.at("responses").get<std::vector<std::string>>();
      if (!e.digest && !e.matcher) throw std::invalid_argument("record needs a digest or a matcher");
      entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw MalformedRecord(path.string(), lineno, ex.what());
    }
  }
  return entries;
}

ScriptedProvider ScriptedProvider::from_file(const std::filesystem::path& path) {
  return ScriptedProvider(load_scripted_entries(path));
}

GenerationResponse ScriptedProvider::generate(const GenerationRequest& request) {
  auto digest = sha256_hex(request.prompt);
  const auto n = static_cast<std::size_t>(request.n_samples);
  const std::size_t need = request.temperature == 0.0 ? 1 : n;

  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    bool hit = (e.digest && *e.digest == digest) ||
               (e.matcher && request.prompt.find(*e.matcher) != std::string::npos);
    if (!hit || e.responses.size() - used_[i] < need) continue;

    GenerationResponse resp;
    resp.provider_name = name();
    resp.prompt_digest = digest;
    if (need == 1) {
      resp.samples.assign(n, e.responses[used_[i]]);
    } else {
      resp.samples.assign(e.responses.begin() + static_cast<std::ptrdiff_t>(used_[i]),
                          e.responses.begin() + static_cast<std::ptrdiff_t>(used_[i] + n));
    }
    used_[i] += need;
    return resp;
  }
  throw FixtureMiss(digest);
}

std::size_t ScriptedProvider::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t total = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) total += entries_[i].responses.size() - used_[i];
  return total;
}

// ----- live HTTP -------------------------------------------------------------

HttpChatOptions HttpChatOptions::from_environment() {
  HttpChatOptions o;
  if (const char* v = std::getenv("HETQA_LLM_URL")) o.base_url = v;
  if (const char* v = std::getenv("HETQA_LLM_MODEL")) o.model = v;
  if (const char* v = std::getenv("HETQA_LLM_KEY")) o.api_key = v;
  return o;
}

GenerationResponse HttpChatProvider::generate(const GenerationRequest& request) {
  if (opts_.base_url.empty()) throw ProviderUnavailable("HETQA_LLM_URL is not set");
  auto ep = parse_base_url(opts_.base_url);

  json body{{"model", opts_.model},
            {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens},
            {"n", request.n_samples}};
  httplib::Headers headers;
  if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);

  auto backoff = opts_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
    if (attempt > 0) {
      spdlog::warn("llm request failed ({}), retry {}/{} in {} ms", last_error, attempt, opts_.max_retries,
                   backoff.count());
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client cli(ep.origin);
    auto secs = opts_.timeout.count() / 1000;
    cli.set_connection_timeout(secs, 0);
    cli.set_read_timeout(secs, 0);
    auto res = cli.Post(ep.path_prefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw ProviderUnavailable("chat completion rejected: HTTP " + std::to_string(res->status) + " " + res->body);

    GenerationResponse out;
    out.provider_name = name();
    out.prompt_digest = sha256_hex(request.prompt);
    try {
      auto j = json::parse(res->body);
      for (const auto& choice : j.at("choices"))
        out.samples.push_back(choice.at("message").at("content").get<std::string>());
    } catch (const json::exception& e) {
      throw ProviderUnavailable(std::string("malformed chat completion: ") + e.what());
    }
    return out;
  }
  throw ProviderUnavailable("chat completion failed after retries: " + last_error);
}

// ----- recording -------------------------------------------------------------

GenerationResponse RecordingProvider::generate(const GenerationRequest& request) {
  auto resp = inner_.generate(request);
  json rec{{"digest", sha256_hex(request.prompt)},
           {"prompt", request.prompt},
           {"temperature", request.temperature},
           {"n_samples", request.n_samples},
           {"responses", request.temperature == 0.0 && !resp.samples.empty()
                             ? std::vector<std::string>{resp.samples.front()}
                             : resp.samples}};
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app);
  out << rec.dump() << "\n";
  return resp;
}

}  // namespace hetqa::llm
