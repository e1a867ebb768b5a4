#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hetqa::llm {

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 256;
  int n_samples = 1;
};

struct GenerationResponse {
  std::vector<std::string> samples;
  std::string provider_name;
  std::chrono::milliseconds latency{0};
  std::string prompt_digest;  // sha256 of the prompt exactly as sent
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual GenerationResponse generate(const GenerationRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Validates the request, calls the provider, and checks the sample count.
// The prompt is passed through byte-for-byte; its digest is logged.
GenerationResponse generate(const GenerationRequest& request, Provider& provider);

// One scripted entry. A record matches a prompt when its digest equals the
// prompt's sha256, or when its matcher is a substring of the prompt.
struct ScriptedEntry {
  std::optional<std::string> digest;
  std::optional<std::string> matcher;
  std::vector<std::string> responses;
};

// Reads a JSONL fixture of {"digest"|"matcher", "responses"} records.
std::vector<ScriptedEntry> load_scripted_entries(const std::filesystem::path& path);

// Deterministic provider backed by a fixture. For each call the first entry
// (file order) that matches and still has enough unconsumed responses
// serves it: n responses at temperature > 0, or one response repeated n
// times at temperature 0. Consumption is serialized.
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(std::vector<ScriptedEntry> entries)
      : entries_(std::move(entries)), used_(entries_.size(), 0) {}
  static ScriptedProvider from_file(const std::filesystem::path& path);

  GenerationResponse generate(const GenerationRequest& request) override;
  std::string name() const override { return "scripted"; }

  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::vector<ScriptedEntry> entries_;
  std::vector<std::size_t> used_;
};

struct HttpChatOptions {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};

  // HETQA_LLM_URL, HETQA_LLM_MODEL, HETQA_LLM_KEY.
  static HttpChatOptions from_environment();
};

// Chat-completions client: POST {base}/chat/completions with a single user
// message and "n" samples. Transport failures, 429 and 5xx are retried up
// to max_retries times with exponential backoff.
class HttpChatProvider final : public Provider {
 public:
  explicit HttpChatProvider(HttpChatOptions opts) : opts_(std::move(opts)) {}
  GenerationResponse generate(const GenerationRequest& request) override;
  std::string name() const override { return "http:" + opts_.model; }

 private:
  HttpChatOptions opts_;
};

// Wraps a provider and appends {"digest","prompt","temperature",
// "n_samples","responses"} lines to a replay file. Replaying that file
// through ScriptedProvider reproduces the run without the network.
class RecordingProvider final : public Provider {
 public:
  RecordingProvider(Provider& inner, std::filesystem::path replay_file)
      : inner_(inner), path_(std::move(replay_file)) {}
  GenerationResponse generate(const GenerationRequest& request) override;
  std::string name() const override { return inner_.name(); }

 private:
  Provider& inner_;
  std::filesystem::path path_;
  std::mutex mu_;
};

}  // namespace hetqa::llm
