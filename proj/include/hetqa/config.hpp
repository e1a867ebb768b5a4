#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "hetqa/orchestrator.hpp"

namespace hetqa {

// Everything a CLI run needs. Sources, lowest precedence first: defaults,
// a key=value file, HETQA_<KEY> environment variables, command-line flags.
// Relative paths in a file resolve against the file's directory.
struct AppConfig {
  std::filesystem::path entities;
  std::filesystem::path relations;
  std::filesystem::path triples;
  std::filesystem::path passages;
  std::filesystem::path index_dir;  // prebuilt indexes from `index`, optional
  std::filesystem::path out_dir = "out";

  std::string llm = "scripted";  // scripted | http
  std::filesystem::path llm_fixture;
  std::filesystem::path llm_record;  // replay file for http runs, optional
  std::string llm_url;
  std::string llm_model;

  std::string embedder = "hashing";  // hashing | shim
  std::string scorer = "lexical";    // lexical | shim
  std::string shim_url = "http://127.0.0.1:8088";

  // datagen inputs
  std::filesystem::path nq;
  std::filesystem::path wiki_pages;

  std::uint64_t seed = 0;
  RunConfig run;

  void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {});
};

// Throws Error on unknown keys or unparsable values.
AppConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::map<std::string, std::string>& overrides = {});

}  // namespace hetqa
