// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "qcg/errors.hpp"
#include "qcg/metrics.hpp"
#include "qcg/text.hpp"

namespace qcg {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

double percent(double v) { return std::round(v * 10000.0) / 100.0; }

bool reads_binary(std::string_view s) {
  for (const auto& token : text::tokenize(s)) {
    if (token == "true" || token == "false" || token == "yes" || token == "no") return true;
  }
  return false;
}

// Raw [0,1] values for one example, before rounding.
struct RawRow {
  std::map<std::string, double> values;
  std::vector<std::string> context_ids;
  bool unparseable = false;
  std::optional<std::string> error;
  std::vector<std::string> warnings;
};

RawRow score_example(const Pipeline& pipeline, const QaExample& ex, PipelineMode mode,
                     bool with_accuracy, bool with_retrieval) {
  RawRow row;
  const AskResult result = pipeline.ask(Query(ex.question, ex.id), mode);
  for (const auto& c : result.contexts) row.context_ids.push_back(c.chunk.id);

  const std::string& answer = result.answer;
  if (text::tokenize(answer).empty()) row.warnings.emplace_back("answer has no tokens");

  double r1 = 0.0;
  double rl = 0.0;
  double met = 0.0;
  int acc = 0;
  bool parsed = false;
  for (const auto& ref : ex.answers) {
    r1 = std::max(r1, metrics::rouge_n(answer, ref, 1));
    rl = std::max(rl, metrics::rouge_l(answer, ref));
    met = std::max(met, metrics::meteor_simplified(answer, ref));
    if (with_accuracy) {
      const auto j = metrics::accuracy_binary(answer, ref);
      acc = std::max(acc, j.correct);
      parsed = parsed || j.parseable;
    }
  }
  row.values["rouge1"] = r1;
  row.values["rougeL"] = rl;
  row.values["bleu1"] = metrics::bleu_1(answer, ex.answers);
  row.values["meteor"] = met;
  if (with_accuracy) {
    row.values["accuracy"] = acc;
    row.unparseable = !parsed;
  }
  if (with_retrieval && ex.gold_chunk_ids) {
    const std::set<std::string> gold(ex.gold_chunk_ids->begin(), ex.gold_chunk_ids->end());
    row.values["mrr@1"] = metrics::mrr_at_k(result.ranked_ids, gold, 1);
    row.values["mrr@10"] = metrics::mrr_at_k(result.ranked_ids, gold, 10);
    row.values["ndcg@1"] = metrics::ndcg_at_k(result.ranked_ids, gold, 1);
    row.values["ndcg@10"] = metrics::ndcg_at_k(result.ranked_ids, gold, 10);
  }
  return row;
}

std::string format_score(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

}  // namespace

std::vector<QaExample> load_dataset_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path.string());
  std::vector<QaExample> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    QaExample ex;
    try {
      const json row = json::parse(line);
      ex.id = row.at("id").get<std::string>();
      ex.question = row.at("question").get<std::string>();
      ex.answers = row.at("answers").get<std::vector<std::string>>();
      if (row.contains("gold_chunk_ids") && !row.at("gold_chunk_ids").is_null()) {
        ex.gold_chunk_ids = row.at("gold_chunk_ids").get<std::vector<std::string>>();
      }
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
    if (ex.id.empty()) throw InputError(where + ": empty id");
    if (text::trim(ex.question).empty()) throw InputError(where + ": blank question");
    if (ex.answers.empty()) throw InputError(where + ": answers must be non-empty");
    if (!seen.insert(ex.id).second) throw InputError(where + ": duplicate id '" + ex.id + "'");
    out.push_back(std::move(ex));
  }
  return out;
}

std::string MetricReport::to_json() const {
  ojson j;
  j["config_hash"] = config_hash;
  j["mode"] = std::string(to_string(mode));
  j["graph_mode"] = std::string(to_string(graph_mode));
  j["top_n"] = top_n;
  j["top_k"] = top_k;
  j["n_dup"] = n_dup;
  j["metrics"] = metrics;
  ojson m = ojson::object();
  for (const auto& name : metrics) {
    if (auto it = means.find(name); it != means.end()) m[name] = it->second;
  }
  j["means"] = std::move(m);
  j["examples_total"] = examples.size();
  j["failures"] = failures;
  j["unparseable"] = unparseable;
  if (generated_at) j["generated_at"] = *generated_at;
  ojson rows = ojson::array();
  for (const auto& ex : examples) {
    ojson r;
    r["id"] = ex.id;
    ojson s = ojson::object();
    for (const auto& name : metrics) {
      if (auto it = ex.scores.find(name); it != ex.scores.end()) s[name] = it->second;
    }
    r["scores"] = std::move(s);
    r["context_ids"] = ex.context_ids;
    if (ex.unparseable) r["unparseable"] = true;
    if (ex.error) r["error"] = *ex.error;
    if (!ex.warnings.empty()) r["warnings"] = ex.warnings;
    rows.push_back(std::move(r));
  }
  j["examples"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string MetricReport::to_markdown() const {
  std::ostringstream md;
  md << "# Metric report\n\n";
  md << "- mode: " << to_string(mode) << "\n";
  md << "- graph mode: " << to_string(graph_mode) << "\n";
  md << "- top_n: " << top_n << ", top_k: " << top_k << ", n_dup: " << n_dup << "\n";
  md << "- config hash: `" << config_hash << "`\n";
  md << "- examples: " << examples.size() << ", failures: " << failures
     << ", unparseable: " << unparseable << "\n";
  if (generated_at) md << "- generated at: " << *generated_at << "\n";

  md << "\n|";
  for (const auto& name : metrics) md << " " << name << " |";
  md << "\n|";
  for (std::size_t i = 0; i < metrics.size(); ++i) md << "---:|";
  md << "\n|";
  for (const auto& name : metrics) {
    auto it = means.find(name);
    md << " " << (it == means.end() ? std::string("-") : format_score(it->second)) << " |";
  }
  md << "\n\n## Per example\n\n| id |";
  for (const auto& name : metrics) md << " " << name << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < metrics.size(); ++i) md << "---:|";
  md << "\n";
  for (const auto& ex : examples) {
    md << "| " << ex.id << " |";
    for (const auto& name : metrics) {
      auto it = ex.scores.find(name);
      md << " " << (it == ex.scores.end() ? std::string(ex.error ? "err" : "-")
                                          : format_score(it->second))
         << " |";
    }
    md << "\n";
  }
  return md.str();
}

MetricReport run_experiment(const Pipeline& pipeline, const std::vector<QaExample>& dataset,
                            PipelineMode mode, int jobs) {
  if (dataset.empty()) throw InputError("dataset is empty");
  const auto& config = pipeline.config();

  bool with_accuracy = true;
  bool with_retrieval = false;
  for (const auto& ex : dataset) {
    for (const auto& a : ex.answers) with_accuracy = with_accuracy && reads_binary(a);
    with_retrieval = with_retrieval || ex.gold_chunk_ids.has_value();
  }

  std::vector<RawRow> rows(dataset.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      try {
        rows[i] = score_example(pipeline, dataset[i], mode, with_accuracy, with_retrieval);
      } catch (const Error& e) {
        rows[i] = RawRow{};
        rows[i].error = std::string(e.category()) + ": " + e.what();
      } catch (const std::exception& e) {
        rows[i] = RawRow{};
        rows[i].error = std::string("internal: ") + e.what();
      }
    }
  };
  const int width = std::clamp(jobs > 0 ? jobs : effective_jobs(config), 1,
                               static_cast<int>(dataset.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(width - 1));
  for (int t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  MetricReport report;
  report.config_hash = config_hash(config);
  report.mode = mode;
  report.graph_mode = config.rerank.graph_mode;
  report.top_n = config.rerank.top_n;
  report.top_k = config.rerank.top_k;
  report.n_dup = config.rerank.n_dup;
  report.metrics = {"rouge1", "rougeL", "bleu1", "meteor"};
  if (with_accuracy) report.metrics.emplace_back("accuracy");
  if (with_retrieval) {
    for (const char* name : {"mrr@1", "mrr@10", "ndcg@1", "ndcg@10"}) {
      report.metrics.emplace_back(name);
    }
  }

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return dataset[a].id < dataset[b].id; });

  // Sums in id order so the means do not depend on worker scheduling.
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (std::size_t i : order) {
    RawRow& raw = rows[i];
    ExampleScores ex;
    ex.id = dataset[i].id;
    ex.context_ids = std::move(raw.context_ids);
    ex.unparseable = raw.unparseable;
    ex.error = std::move(raw.error);
    ex.warnings = std::move(raw.warnings);
    if (ex.error) ++report.failures;
    if (ex.unparseable) ++report.unparseable;
    for (const auto& [name, value] : raw.values) {
      ex.scores[name] = percent(value);
      auto& [sum, count] = sums[name];
      sum += value;
      ++count;
    }
    report.examples.push_back(std::move(ex));
  }
  for (const auto& [name, sc] : sums) {
    report.means[name] = percent(sc.first / static_cast<double>(sc.second));
  }
  return report;
}

std::string_view to_string(SweepParameter p) noexcept {
  return p == SweepParameter::NDup ? "n-dup" : "top-n";
}

SweepParameter parse_sweep_parameter(std::string_view text) {
  if (text == "n-dup") return SweepParameter::NDup;
  if (text == "top-n") return SweepParameter::TopN;
  throw ConfigError("unknown sweep '" + std::string(text) + "' (expected n-dup|top-n)");
}

std::vector<int> default_sweep_values(SweepParameter p) {
  if (p == SweepParameter::NDup) return {1, 2, 3, 4, 5};
  return {5, 10, 15, 20};
}

std::vector<SweepPoint> run_sweep(const PipelineConfig& base,
                                  std::shared_ptr<const VectorStore> store,
                                  std::shared_ptr<const Embedder> embedder,
                                  std::shared_ptr<const ChatClient> chat,
                                  const std::vector<QaExample>& dataset, PipelineMode mode,
                                  SweepParameter parameter, const std::vector<int>& values,
                                  int jobs) {
  if (values.empty()) throw ConfigError("sweep has no points");
  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (int value : values) {
    PipelineConfig config = base;
    if (parameter == SweepParameter::NDup) {
      config.rerank.n_dup = value;
    } else {
      config.rerank.top_n = value;
    }
    const Pipeline pipeline(config, store, embedder, chat);
    const auto start = std::chrono::steady_clock::now();
    SweepPoint point;
    point.value = value;
    point.report = run_experiment(pipeline, dataset, mode, jobs);
    point.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    points.push_back(std::move(point));
  }
  return points;
}

std::string sweep_summary_json(SweepParameter parameter, const std::vector<SweepPoint>& points,
                               const std::string& config_hash) {
  ojson j;
  j["parameter"] = std::string(to_string(parameter));
  j["config_hash"] = config_hash;
  ojson rows = ojson::array();
  for (const auto& p : points) {
    ojson r;
    r["value"] = p.value;
    r["report"] = "report_" + std::string(to_string(parameter)) + "_" +
                  std::to_string(p.value) + ".json";
    r["report_config_hash"] = p.report.config_hash;
    r["wall_seconds"] = p.wall_seconds;
    r["means"] = p.report.means;
    rows.push_back(std::move(r));
  }
  j["points"] = std::move(rows);
  return j.dump(2) + "\n";
}

ExportSummary export_finetune_corpus(const std::vector<QaExample>& examples,
                                     const VectorStore* store, std::size_t negatives_per_example,
                                     std::uint64_t seed, std::ostream& out) {
  std::vector<std::vector<std::string>> positives;
  positives.reserve(examples.size());
  for (const auto& ex : examples) {
    std::vector<std::string> pos = ex.answers;
    if (store != nullptr && ex.gold_chunk_ids) {
      for (const auto& id : *ex.gold_chunk_ids) {
        if (auto c = store->find(id)) pos.push_back(std::move(c->text));
      }
    }
    if (pos.empty()) throw InputError("example '" + ex.id + "' has no positive text");
    positives.push_back(std::move(pos));
  }

  boost::random::mt19937_64 rng(seed);
  ExportSummary summary;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::set<std::string> own(positives[i].begin(), positives[i].end());
    std::set<std::string> distinct;
    for (std::size_t j = 0; j < examples.size(); ++j) {
      if (j == i) continue;
      for (const auto& p : positives[j]) {
        if (!own.contains(p)) distinct.insert(p);
      }
    }
    std::vector<std::string> pool(distinct.begin(), distinct.end());
    if (negatives_per_example > 0 && pool.empty()) {
      throw InputError("no negatives available for example '" + examples[i].id + "'");
    }

    std::vector<std::string> neg;
    const std::size_t unique = std::min(negatives_per_example, pool.size());
    for (std::size_t t = 0; t < unique; ++t) {
      boost::random::uniform_int_distribution<std::size_t> pick(t, pool.size() - 1);
      std::swap(pool[t], pool[pick(rng)]);
      neg.push_back(pool[t]);
    }
    if (unique < negatives_per_example) {
      ++summary.with_replacement;
      boost::random::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      while (neg.size() < negatives_per_example) neg.push_back(pool[pick(rng)]);
    }

    ojson row;
    row["query"] = examples[i].question;
    row["pos"] = positives[i];
    row["neg"] = std::move(neg);
    out << row.dump() << '\n';
    ++summary.examples;
  }
  return summary;
}

}  // namespace qcg
