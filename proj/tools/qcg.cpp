// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

// qcg: ingest a corpus, ask questions, evaluate, export fine-tuning triplets
// and dump per-iteration graph scores.

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "qcg/errors.hpp"
#include "qcg/eval.hpp"
#include "qcg/pipeline.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kInput = 2,
  kConfig = 3,
  kStore = 4,
  kNumeric = 5,
  kService = 6,
  kUsage = 64,
};

int exit_code_for(std::string_view category) {
  if (category == "input" || category == "empty_completion") return kInput;
  if (category == "config" || category == "template") return kConfig;
  if (category == "store_schema" || category == "duplicate_id" || category == "empty_store") {
    return kStore;
  }
  if (category == "dimension" || category == "degenerate_vector" ||
      category == "degenerate_graph") {
    return kNumeric;
  }
  if (category == "embed_service" || category == "llm_service") return kService;
  return kInternal;
}

int report_error(std::string_view category, std::string_view message) {
  ojson err;
  err["error"] = {{"category", category}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return exit_code_for(category);
}

// Flag values that override the config file when given.
struct Overrides {
  std::string config_path;
  std::string preset;
  std::string store;
  std::string cache_dir;
  std::optional<std::string> graph_mode;
  std::optional<int> top_n;
  std::optional<int> top_k;
  std::optional<int> n_dup;
  std::optional<double> damping;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::size_t> dim;
  bool critical_only = false;
  bool expanded_slot = false;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "cultour|iirc|strategyqa|hotpotqa|squad|musique");
  cmd->add_option("--store", o.store, "vector store directory");
  cmd->add_option("--cache-dir", o.cache_dir, "embedding cache directory");
  cmd->add_option("--graph-mode", o.graph_mode, "star|full");
  cmd->add_option("--top-n", o.top_n, "first-stage candidates");
  cmd->add_option("--top-k", o.top_k, "chunks handed to the answer model");
  cmd->add_option("--n-dup", o.n_dup, "query duplication count");
  cmd->add_option("--damping", o.damping, "damping coefficient in (0,1)");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--jobs", o.jobs, "worker threads (0 = auto)");
  cmd->add_option("--dim", o.dim, "local embedder dimension");
  cmd->add_flag("--critical-only", o.critical_only, "duplicate only the critical information");
  cmd->add_flag("--expanded-query-slot", o.expanded_slot,
                "fill the answer prompt with the expanded query");
}

qcg::PipelineConfig resolve_config(const Overrides& o) {
  qcg::PipelineConfig c = o.config_path.empty() ? qcg::PipelineConfig{}
                                                : qcg::load_config(o.config_path);
  if (!o.preset.empty()) qcg::apply_preset(c, o.preset);
  if (!o.store.empty()) c.store_path = o.store;
  if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
  if (o.graph_mode) c.rerank.graph_mode = qcg::parse_graph_mode(*o.graph_mode);
  if (o.top_n) c.rerank.top_n = *o.top_n;
  if (o.top_k) c.rerank.top_k = *o.top_k;
  if (o.n_dup) c.rerank.n_dup = *o.n_dup;
  if (o.damping) c.rerank.damping = *o.damping;
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.dim) c.embedder.dim = *o.dim;
  if (o.critical_only) c.duplication = qcg::DuplicationMode::CriticalOnly;
  if (o.expanded_slot) c.query_slot = qcg::QuerySlot::Expanded;
  c.validate();
  return c;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw qcg::InputError("cannot write " + path.string());
  out << content;
  if (!out) throw qcg::InputError("failed writing " + path.string());
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

ojson scored_json(const std::vector<qcg::ScoredChunk>& chunks) {
  ojson arr = ojson::array();
  for (const auto& c : chunks) {
    arr.push_back({{"id", c.chunk.id}, {"score", c.score}, {"text", c.chunk.text}});
  }
  return arr;
}

int cmd_ingest(const Overrides& o, const std::string& corpus, bool upsert, bool as_json) {
  const auto config = resolve_config(o);
  if (config.store_path.empty()) throw qcg::ConfigError("ingest needs --store");
  const auto docs = qcg::load_corpus_jsonl(corpus);
  const auto s = qcg::ingest_corpus(docs, config, config.store_path, upsert);
  const auto hash = qcg::config_hash(config);
  if (as_json) {
    ojson j;
    j["config_hash"] = hash;
    j["store"] = config.store_path;
    j["documents"] = s.documents;
    j["chunks"] = s.chunks;
    j["dim"] = s.dim;
    j["store_size"] = s.store_size;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "ingested " << s.documents << " documents as " << s.chunks << " chunks (dim "
              << s.dim << "), store now holds " << s.store_size << " chunks\n"
              << "config " << hash << '\n';
  }
  return kOk;
}

int cmd_ask(const Overrides& o, const std::string& question, const std::string& mode_name,
            bool as_json) {
  const auto config = resolve_config(o);
  const auto mode = qcg::parse_pipeline_mode(mode_name);
  const auto pipeline = qcg::Pipeline::open(config);
  const auto r = pipeline.ask(qcg::Query(question), mode);
  const auto hash = qcg::config_hash(config);

  if (as_json) {
    ojson j;
    j["config_hash"] = hash;
    j["mode"] = std::string(qcg::to_string(mode));
    j["question"] = question;
    j["answer"] = r.answer;
    j["contexts"] = scored_json(r.contexts);
    j["candidates"] = scored_json(r.candidates);
    j["ranked_ids"] = r.ranked_ids;
    if (r.critical_info) j["critical_info"] = *r.critical_info;
    if (r.expanded_query) j["expanded_query"] = *r.expanded_query;
    j["extraction_fell_back"] = r.extraction_fell_back;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    std::cout << j.dump(2) << '\n';
    return kOk;
  }
  std::cout << r.answer << "\n\n";
  std::cout << "mode " << qcg::to_string(mode) << ", " << r.contexts.size() << " contexts\n";
  for (const auto& c : r.contexts) {
    std::cout << "  " << c.chunk.id << "  " << std::fixed << std::setprecision(6) << c.score
              << '\n';
  }
  if (mode == qcg::PipelineMode::Qcg) {
    std::cout << "iterations " << r.iterations << ", converged "
              << (r.converged ? "yes" : "no") << '\n';
  }
  std::cout << "config " << hash << '\n';
  return kOk;
}

int cmd_eval(const Overrides& o, const std::string& dataset_path, const std::string& mode_name,
             const std::string& out_dir, const std::string& sweep, bool timestamps, bool as_json) {
  const auto config = resolve_config(o);
  const auto mode = qcg::parse_pipeline_mode(mode_name);
  const auto dataset = qcg::load_dataset_jsonl(dataset_path);
  if (config.store_path.empty() && mode != qcg::PipelineMode::WoRag) {
    throw qcg::ConfigError("eval needs --store");
  }
  auto store = std::make_shared<const qcg::VectorStore>(
      config.store_path.empty() ? qcg::VectorStore{} : qcg::VectorStore::load(config.store_path));
  const auto embedder = qcg::make_embedder(config.embedder, config.cache_dir);
  const auto chat = qcg::make_chat_client(config.chat);
  const qcg::Pipeline base(config, store, embedder, chat);
  const fs::path out(out_dir);
  const std::string stamp = timestamps ? utc_now() : std::string();

  auto emit = [&](qcg::MetricReport& report, const std::string& stem) {
    if (timestamps) report.generated_at = stamp;
    write_file(out / (stem + ".json"), report.to_json());
    write_file(out / (stem + ".md"), report.to_markdown());
  };

  ojson summary;
  if (sweep.empty()) {
    auto report = qcg::run_experiment(base, dataset, mode, config.jobs);
    emit(report, "report");
    summary["config_hash"] = report.config_hash;
    summary["report"] = (out / "report.json").string();
    summary["means"] = report.means;
    summary["failures"] = report.failures;
  } else {
    const auto parameter = qcg::parse_sweep_parameter(sweep);
    auto points = qcg::run_sweep(config, store, embedder, chat, dataset, mode, parameter,
                                 qcg::default_sweep_values(parameter), config.jobs);
    for (auto& p : points) {
      emit(p.report, "report_" + std::string(qcg::to_string(parameter)) + "_" +
                         std::to_string(p.value));
    }
    const auto text = qcg::sweep_summary_json(parameter, points, qcg::config_hash(config));
    write_file(out / ("sweep_" + std::string(qcg::to_string(parameter)) + ".json"), text);
    summary = ojson::parse(text);
  }
  if (as_json) {
    std::cout << summary.dump(2) << '\n';
  } else {
    std::cout << "wrote reports to " << out.string() << '\n' << summary.dump(2) << '\n';
  }
  return kOk;
}

int cmd_export(const Overrides& o, const std::string& dataset_path, const std::string& out_path,
               std::size_t negatives) {
  const auto config = resolve_config(o);
  const auto dataset = qcg::load_dataset_jsonl(dataset_path);
  std::optional<qcg::VectorStore> store;
  if (!config.store_path.empty()) store = qcg::VectorStore::load(config.store_path);

  std::ostringstream body;
  const auto s = qcg::export_finetune_corpus(dataset, store ? &*store : nullptr, negatives,
                                             config.seed, body);
  write_file(out_path, body.str());

  ojson meta;
  meta["config_hash"] = qcg::config_hash(config);
  meta["seed"] = config.seed;
  meta["negatives_per_example"] = negatives;
  meta["examples"] = s.examples;
  meta["with_replacement"] = s.with_replacement;
  write_file(out_path + ".meta.json", meta.dump(2) + "\n");
  if (s.with_replacement > 0) {
    std::cerr << "warning: " << s.with_replacement
              << " examples had too few distinct negatives; sampled with replacement\n";
  }
  std::cout << "wrote " << s.examples << " triplets to " << out_path << '\n';
  return kOk;
}

int cmd_dump_graph(const Overrides& o, const std::string& question, const std::string& out_path) {
  const auto config = resolve_config(o);
  const auto pipeline = qcg::Pipeline::open(config);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) throw qcg::InputError("cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;

  ojson header;
  header["config_hash"] = qcg::config_hash(config);
  header["graph_mode"] = std::string(qcg::to_string(config.rerank.graph_mode));
  const auto trace = pipeline.trace_graph(qcg::Query(question), qcg::jsonl_iteration_dump(out));
  ojson ids = ojson::array();
  for (const auto& c : trace.candidates) ids.push_back(c.chunk.id);
  header["nodes"] = ids;
  header["expanded_query"] = trace.expanded.concatenated;
  header["sims"] = trace.sims;
  header["iterations"] = trace.rerank.iterations;
  header["converged"] = trace.rerank.converged;
  std::cerr << header.dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-centric graph reranking for retrieval-augmented generation"};
  app.require_subcommand(1);
  Overrides o;

  bool as_json = false;
  auto* ingest = app.add_subcommand("ingest", "chunk, embed and store a JSON-lines corpus");
  std::string corpus;
  bool upsert = false;
  ingest->add_option("corpus", corpus, "corpus .jsonl")->required()->check(CLI::ExistingFile);
  ingest->add_flag("--upsert", upsert, "replace chunks whose ids already exist");
  ingest->add_flag("--json", as_json, "machine-readable output");
  add_config_flags(ingest, o);

  auto* ask = app.add_subcommand("ask", "answer one question");
  std::string question;
  std::string mode = "qcg";
  ask->add_option("question", question)->required();
  ask->add_option("--mode", mode, "wo-rag|w-rag|qcg|bm25|bm25l");
  ask->add_flag("--json", as_json, "emit answer and provenance as JSON");
  add_config_flags(ask, o);

  auto* eval = app.add_subcommand("eval", "score a pipeline on a dataset");
  std::string dataset;
  std::string out_dir = "reports";
  std::string sweep;
  bool timestamps = false;
  eval->add_option("dataset", dataset, "dataset .jsonl")->required()->check(CLI::ExistingFile);
  eval->add_option("--mode", mode, "wo-rag|w-rag|qcg|bm25|bm25l");
  eval->add_option("--out", out_dir, "report directory");
  eval->add_option("--sweep", sweep, "n-dup|top-n");
  eval->add_flag("--timestamps", timestamps, "record generation time in reports");
  eval->add_flag("--json", as_json, "machine-readable summary");
  add_config_flags(eval, o);

  auto* exp = app.add_subcommand("export-finetune", "write query/pos/neg triplets");
  std::string out_path;
  std::size_t negatives = 1;
  exp->add_option("dataset", dataset, "dataset .jsonl")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", out_path, "output .jsonl")->required();
  exp->add_option("--negatives", negatives, "negatives per example");
  add_config_flags(exp, o);

  auto* dump = app.add_subcommand("dump-graph", "print per-iteration graph scores as JSON lines");
  std::string dump_out;
  dump->add_option("question", question)->required();
  dump->add_option("--out", dump_out, "write iterations here instead of stdout");
  add_config_flags(dump, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kUsage;
  }

  try {
    if (*ingest) return cmd_ingest(o, corpus, upsert, as_json);
    if (*ask) return cmd_ask(o, question, mode, as_json);
    if (*eval) return cmd_eval(o, dataset, mode, out_dir, sweep, timestamps, as_json);
    if (*exp) return cmd_export(o, dataset, out_path, negatives);
    if (*dump) return cmd_dump_graph(o, question, dump_out);
  } catch (const qcg::Error& e) {
    return report_error(e.category(), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return kInternal;
}
