#include "hetqa/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <vector>

#include "hetqa/errors.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "entities",        "relations",          "triples",          "passages",       "index_dir",
      "out_dir",         "llm",                "llm_fixture",      "llm_record",     "llm_url",
      "llm_model",       "embedder",           "scorer",           "shim_url",       "nq",
      "wiki_pages",      "seed",               "n_hops",           "diverse_queries", "k",
      "retrieval_depth", "query_temperature",  "answer_temperature", "max_tokens",   "mode",
      "routing",         "text_retriever",     "kb_retriever",     "unified_retriever", "use_sparql",
      "describe_links"};
  return keys;
}

fs::path resolve(const std::string& v, const fs::path& base) {
  fs::path p(v);
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

bool parse_bool(const std::string& v) {
  auto s = casefold(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

std::string env_name(const std::string& key) {
  std::string out = "HETQA_";
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace

void AppConfig::set(const std::string& key, const std::string& value, const fs::path& base) {
  try {
    if (key == "entities") entities = resolve(value, base);
    else if (key == "relations") relations = resolve(value, base);
    else if (key == "triples") triples = resolve(value, base);
    else if (key == "passages") passages = resolve(value, base);
    else if (key == "index_dir") index_dir = resolve(value, base);
    else if (key == "out_dir") out_dir = resolve(value, base);
    else if (key == "llm") llm = value;
    else if (key == "llm_fixture") llm_fixture = resolve(value, base);
    else if (key == "llm_record") llm_record = resolve(value, base);
    else if (key == "llm_url") llm_url = value;
    else if (key == "llm_model") llm_model = value;
    else if (key == "embedder") embedder = value;
    else if (key == "scorer") scorer = value;
    else if (key == "shim_url") shim_url = value;
    else if (key == "nq") nq = resolve(value, base);
    else if (key == "wiki_pages") wiki_pages = resolve(value, base);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "n_hops") run.n_hops = std::stoi(value);
    else if (key == "diverse_queries") run.diverse_queries = std::stoi(value);
    else if (key == "k") run.k = std::stoul(value);
    else if (key == "retrieval_depth") run.retrieval_depth = std::stoul(value);
    else if (key == "query_temperature") run.query_temperature = std::stod(value);
    else if (key == "answer_temperature") run.answer_temperature = std::stod(value);
    else if (key == "max_tokens") run.max_tokens = std::stoi(value);
    else if (key == "mode") run.mode = mode_from_string(value);
    else if (key == "routing") run.routing = routing_from_string(value);
    else if (key == "text_retriever") run.text_retriever = retriever_from_string(value);
    else if (key == "kb_retriever") run.kb_retriever = retriever_from_string(value);
    else if (key == "unified_retriever") run.unified_retriever = retriever_from_string(value);
    else if (key == "use_sparql") run.use_sparql = parse_bool(value);
    else if (key == "describe_links") run.describe_links = parse_bool(value);
    else throw Error("unknown config key '" + key + "'");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error("bad value '" + value + "' for config key '" + key + "': " + e.what());
  }
  if (llm != "scripted" && llm != "http") throw Error("llm must be scripted or http");
  if (embedder != "hashing" && embedder != "shim") throw Error("embedder must be hashing or shim");
  if (scorer != "lexical" && scorer != "shim") throw Error("scorer must be lexical or shim");
}

AppConfig load_config(const std::optional<fs::path>& file, const std::map<std::string, std::string>& overrides) {
  AppConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error("cannot read config " + file->string());
    auto base = fs::absolute(*file).parent_path();
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      auto t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto eq = t.find('=');
      if (eq == std::string::npos) throw MalformedRecord(file->string(), n, "expected key = value");
      try {
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), base);
      } catch (const Error& e) {
        throw MalformedRecord(file->string(), n, e.what());
      }
    }
  }
  for (const auto& key : known_keys())
    if (const char* v = std::getenv(env_name(key).c_str())) cfg.set(key, v);
  for (const auto& [key, value] : overrides) cfg.set(key, value);
  cfg.run.validate();
  return cfg;
}

}  // namespace hetqa
