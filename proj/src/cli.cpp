#include "hetqa/cli.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hetqa/datagen.hpp"
#include "hetqa/errors.hpp"
#include "hetqa/evaluator.hpp"
#include "hetqa/text_index.hpp"
#include "hetqa/text_util.hpp"
#include "hetqa/trace_io.hpp"

namespace hetqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

TripleStore load_store(const AppConfig& cfg) {
  if (cfg.entities.empty() || cfg.relations.empty() || cfg.triples.empty())
    throw Error("config must name entities, relations and triples files");
  return ingest(cfg.entities, cfg.relations, cfg.triples);
}

const char* kCorpora[] = {"text", "kb", "unified"};

fs::path index_file(const fs::path& dir, const std::string& corpus, Retriever r) {
  return dir / (corpus + "." + std::string(to_string(r)) + ".json");
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  return json::parse(in);
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

template <class T>
std::vector<T> read_jsonl(const fs::path& p, T (*conv)(const json&)) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  std::vector<T> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(conv(json::parse(line)));
    } catch (const std::exception& e) {
      throw MalformedRecord(p.string(), n, e.what());
    }
  }
  return out;
}

template <class Range>
std::string to_jsonl(const Range& items) {
  std::string s;
  for (const auto& it : items) s += to_json(it).dump() + "\n";
  return s;
}

}  // namespace

// ----- runtime ---------------------------------------------------------------

Runtime::Runtime(const AppConfig& cfg, bool need_llm) : cfg_(cfg), store_(load_store(cfg)) {
  ShimOptions shim;
  shim.base_url = cfg.shim_url;
  if (cfg.embedder == "shim")
    embedder_ = std::make_unique<HttpEmbeddingProvider>(shim);
  else
    embedder_ = std::make_unique<HashingEmbedder>();
  if (cfg.scorer == "shim")
    scorer_ = std::make_unique<HttpRelevanceScorer>(shim);
  else
    scorer_ = std::make_unique<LexicalOverlapScorer>();
  if (!need_llm) return;

  if (cfg.llm == "http") {
    auto opts = llm::HttpChatOptions::from_environment();
    if (!cfg.llm_url.empty()) opts.base_url = cfg.llm_url;
    if (!cfg.llm_model.empty()) opts.model = cfg.llm_model;
    if (opts.base_url.empty() || opts.model.empty()) throw Error("http llm needs llm_url and llm_model");
    base_llm_ = std::make_unique<llm::HttpChatProvider>(opts);
  } else {
    if (cfg.llm_fixture.empty()) throw Error("scripted llm needs llm_fixture");
    base_llm_ = std::make_unique<llm::ScriptedProvider>(llm::load_scripted_entries(cfg.llm_fixture));
  }
  llm_ = base_llm_.get();
  if (!cfg.llm_record.empty()) {
    recorder_ = std::make_unique<llm::RecordingProvider>(*base_llm_, cfg.llm_record);
    llm_ = recorder_.get();
  }
}

Toolset::Providers Runtime::providers() const { return {embedder_.get(), scorer_.get(), llm_}; }

Toolset Runtime::toolset() const {
  std::vector<Passage> text;
  if (!cfg_.passages.empty()) text = load_passages(cfg_.passages);
  Toolset::Prebuilt pre;
  if (!cfg_.index_dir.empty()) {
    for (const std::string corpus : kCorpora) {
      if (auto p = index_file(cfg_.index_dir, corpus, Retriever::sparse); fs::exists(p))
        pre.sparse.emplace(corpus, SparseIndex::from_json(read_json(p)));
      if (auto p = index_file(cfg_.index_dir, corpus, Retriever::dense); fs::exists(p))
        pre.dense.emplace(corpus, DenseIndex::from_json(read_json(p)));
    }
  }
  return Toolset::assemble(store_, std::move(text), providers(), cfg_.run, std::move(pre));
}

std::vector<PipelineTrace> run_benchmark(const std::vector<BenchmarkRecord>& records, const RunConfig& config,
                                         const Toolset& tools, int threads) {
  std::vector<PipelineTrace> traces(records.size());
  const auto n = static_cast<long>(records.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads))
  for (long i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    auto& t = traces[static_cast<std::size_t>(i)];
    try {
      t = answer_question(r.question, config, tools, &r).trace;
    } catch (const std::exception& e) {
      t = PipelineTrace{};
      t.record_id = r.id;
      t.question = r.question;
      t.mode = config.mode;
      t.errors.push_back(e.what());
    }
  }
  return traces;
}

// ----- commands --------------------------------------------------------------

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string log_level = "warn";

  AppConfig load() const {
    std::map<std::string, std::string> overrides;
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got " + s);
      overrides[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    if (seed) overrides["seed"] = std::to_string(*seed);
    return load_config(config.empty() ? std::nullopt : std::optional<fs::path>(config), overrides);
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key=value config file");
  cmd->add_option("--set", c.sets, "override a config key (key=value), repeatable");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--log-level", c.log_level, "trace|debug|info|warn|error|off");
}

int cmd_ingest(const Common& c, std::ostream& out) {
  auto cfg = c.load();
  auto store = load_store(cfg);
  const auto& s = store.stats();
  out << "entities " << s.entities << "\nrelations " << s.relations << "\ntriples " << s.triples << "\n";
  return 0;
}

int cmd_index(const Common& c, const std::string& out_dir, std::ostream& out) {
  auto cfg = c.load();
  Runtime rt(cfg, false);
  auto tools = Toolset::assemble(rt.store(), cfg.passages.empty() ? std::vector<Passage>{} : load_passages(cfg.passages),
                                 rt.providers(), RunConfig{} /* text dense, kb sparse */);
  fs::path dir = out_dir.empty() ? cfg.out_dir / "index" : fs::path(out_dir);
  fs::create_directories(dir);
  auto& embedder = *rt.providers().embedder;
  for (const std::string corpus : kCorpora) {
    const auto& passages = tools.corpus(corpus);
    auto sparse = SparseIndex::build(passages);
    write_text(index_file(dir, corpus, Retriever::sparse), sparse.to_json().dump() + "\n");
    auto dense = DenseIndex::build(passages, embedder);
    write_text(index_file(dir, corpus, Retriever::dense), dense.to_json().dump() + "\n");
    out << corpus << ": " << passages.size() << " passages\n";
  }
  out << "indexes written to " << dir.string() << "\n";
  return 0;
}

int cmd_ask(const Common& c, const std::string& question, std::ostream& out) {
  auto cfg = c.load();
  if (cfg.run.mode == Mode::oracle) throw CLI::ValidationError("--question", "oracle mode needs a benchmark record");
  Runtime rt(cfg);
  auto tools = rt.toolset();
  auto result = answer_question(question, cfg.run, tools);
  auto path = cfg.out_dir / "ask_trace.json";
  write_text(path, to_json(result.trace).dump(2) + "\n");
  out << result.answer << "\ntrace: " << path.string() << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& benchmark, int parallel, const std::string& out_dir,
             std::ostream& out) {
  auto cfg = c.load();
  auto records = load_benchmark(benchmark);
  Runtime rt(cfg);
  auto tools = rt.toolset();
  auto traces = run_benchmark(records, cfg.run, tools, parallel);
  auto report = evaluate_run(records, traces);
  report.metadata["mode"] = std::string(to_string(cfg.run.mode));
  report.metadata["routing"] = std::string(to_string(cfg.run.routing));
  report.metadata["use_sparql"] = cfg.run.use_sparql ? "true" : "false";
  report.metadata["benchmark"] = fs::path(benchmark).filename().string();

  fs::path dir = out_dir.empty() ? cfg.out_dir : fs::path(out_dir);
  fs::create_directories(dir);
  save_traces(dir / "traces.jsonl", traces);
  std::ostringstream jsonl, table;
  write_report_jsonl(jsonl, report);
  write_report_table(table, report);
  write_text(dir / "report.jsonl", jsonl.str());
  write_text(dir / "report.txt", table.str());
  out << table.str() << "report: " << (dir / "report.txt").string() << "\n";
  return 0;
}

int cmd_diagnose(const Common& c, const std::string& traces_path, const std::string& benchmark, std::ostream& out) {
  (void)c;
  auto traces = load_traces(traces_path);
  auto records = load_benchmark(benchmark);
  write_diagnostics(out, sparql_diagnostics(traces, records));
  return 0;
}

int cmd_datagen_run(const Common& c, const std::string& out_dir, std::ostream& out) {
  auto cfg = c.load();
  if (cfg.nq.empty()) throw Error("datagen needs the nq config key");
  Runtime rt(cfg);
  auto anchors = datagen::load_anchors(cfg.nq);
  datagen::WikiPages pages;
  if (!cfg.wiki_pages.empty()) pages = datagen::load_wiki_pages(cfg.wiki_pages);
  auto result = datagen::run_pipeline(anchors, rt.store(), pages, rt.llm(), cfg.seed);

  fs::path dir = out_dir.empty() ? cfg.out_dir / "datagen" : fs::path(out_dir);
  fs::create_directories(dir);
  write_text(dir / "questions.jsonl", to_jsonl(result.questions));
  std::string passages, rejections;
  for (const auto& p : result.passages)
    passages += json{{"id", p.id}, {"title", p.title}, {"text", p.body}}.dump() + "\n";
  for (const auto& r : result.rejections)
    rejections += json{{"anchor", r.anchor_question}, {"stage", r.stage}, {"reason", r.reason}}.dump() + "\n";
  write_text(dir / "passages.jsonl", passages);
  write_text(dir / "rejections.jsonl", rejections);
  save_benchmark(dir / "benchmark.jsonl", datagen::to_benchmark(result.questions));
  out << result.questions.size() << " questions, " << result.rejections.size() << " rejections -> "
      << dir.string() << "\n";
  return 0;
}

int cmd_datagen_export(const Common& c, const std::string& questions, int annotators, const std::string& out_path,
                       std::ostream& out) {
  auto cfg = c.load();
  auto qs = read_jsonl<datagen::ComposedQuestion>(questions, &datagen::composed_from_json);
  auto tasks = datagen::export_annotation(qs, annotators, cfg.seed);
  write_text(out_path, to_jsonl(tasks));
  out << tasks.size() << " annotation tasks -> " << out_path << "\n";
  return 0;
}

int cmd_datagen_import(const std::string& questions, const std::string& verdicts, const std::string& out_dir,
                       std::ostream& out) {
  auto qs = read_jsonl<datagen::ComposedQuestion>(questions, &datagen::composed_from_json);
  auto vs = read_jsonl<datagen::Verdict>(verdicts, &datagen::verdict_from_json);
  auto updated = datagen::import_verdicts(std::move(qs), vs);
  fs::path dir(out_dir);
  fs::create_directories(dir);
  write_text(dir / "questions.jsonl", to_jsonl(updated));
  auto bench = datagen::to_benchmark(updated);
  save_benchmark(dir / "benchmark.jsonl", bench);
  out << bench.size() << " of " << updated.size() << " questions kept -> " << dir.string() << "\n";
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid text and knowledge-base multi-hop question answering"};
  app.name("hetqa");
  app.require_subcommand(1);

  Common common;
  std::string out_dir, question, benchmark, traces_path, questions, verdicts, out_path;
  int parallel = 1, annotators = 2;

  auto* ingest_cmd = app.add_subcommand("ingest", "load and validate the triple store");
  add_common(ingest_cmd, common);
  auto* index_cmd = app.add_subcommand("index", "build sparse and dense indexes");
  add_common(index_cmd, common);
  index_cmd->add_option("--out", out_dir, "output directory");
  auto* ask_cmd = app.add_subcommand("ask", "answer one question");
  add_common(ask_cmd, common);
  ask_cmd->add_option("--question,-q", question, "question text")->required();
  auto* eval_cmd = app.add_subcommand("eval", "run and score a benchmark");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--benchmark,-b", benchmark, "benchmark JSONL")->required();
  eval_cmd->add_option("--parallel,-j", parallel, "questions answered concurrently")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", out_dir, "output directory");
  auto* diag_cmd = app.add_subcommand("diagnose-sparql", "QID / QID+REL / QID* over a trace set");
  add_common(diag_cmd, common);
  diag_cmd->add_option("--traces", traces_path, "traces JSONL")->required();
  diag_cmd->add_option("--benchmark,-b", benchmark, "benchmark JSONL")->required();

  auto* datagen_cmd = app.add_subcommand("datagen", "dataset construction");
  datagen_cmd->require_subcommand(1);
  auto* dg_run = datagen_cmd->add_subcommand("run", "generate questions from anchors");
  add_common(dg_run, common);
  dg_run->add_option("--out", out_dir, "output directory");
  auto* dg_export = datagen_cmd->add_subcommand("export", "write annotation tasks");
  add_common(dg_export, common);
  dg_export->add_option("--questions", questions, "questions JSONL")->required();
  dg_export->add_option("--annotators", annotators, "annotators per record")->check(CLI::PositiveNumber);
  dg_export->add_option("--out", out_path, "task file")->required();
  auto* dg_import = datagen_cmd->add_subcommand("import", "apply annotation verdicts");
  add_common(dg_import, common);
  dg_import->add_option("--questions", questions, "questions JSONL")->required();
  dg_import->add_option("--verdicts", verdicts, "verdict JSONL")->required();
  dg_import->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  auto logger = std::make_shared<spdlog::logger>("hetqa", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
  logger->set_level(spdlog::level::from_str(common.log_level));
  // Restore the caller's logger on the way out; dispatch is also called in-process.
  struct Restore {
    std::shared_ptr<spdlog::logger> prev = spdlog::default_logger();
    ~Restore() { spdlog::set_default_logger(prev); }
  } restore;
  spdlog::set_default_logger(logger);

  try {
    if (*ingest_cmd) return cmd_ingest(common, out);
    if (*index_cmd) return cmd_index(common, out_dir, out);
    if (*ask_cmd) return cmd_ask(common, question, out);
    if (*eval_cmd) return cmd_eval(common, benchmark, parallel, out_dir, out);
    if (*diag_cmd) return cmd_diagnose(common, traces_path, benchmark, out);
    if (*dg_run) return cmd_datagen_run(common, out_dir, out);
    if (*dg_export) return cmd_datagen_export(common, questions, annotators, out_path, out);
    if (*dg_import) return cmd_datagen_import(questions, verdicts, out_dir, out);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hetqa
