#include "summscore/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "summscore/random.hpp"

namespace summscore {

namespace {

constexpr const char* kGoldPrefix = "gold:";

const std::string& comparison_text(const AnnotatedExample& ex) {
  return ex.reference.empty() ? ex.document : ex.reference;
}

std::string learned_metric_name(const ScorerModel& model) {
  std::string name = "summscore_" + to_string(model.dimension());
  if (model.pairing() == PairingKind::kSummaryReference) {
    name += "_sref";
  }
  return name;
}

Json optimizer_json(const OptimizerConfig& config) {
  return Json{{"learning_rate", config.learning_rate},
              {"weight_decay", config.weight_decay},
              {"batch_size", config.batch_size},
              {"epochs_per_round", config.epochs_per_round},
              {"warmup_fraction", config.warmup_fraction},
              {"seed", config.seed},
              {"freeze_encoder", config.freeze_encoder}};
}

Json trainer_json(const TrainerOptions& options) {
  return Json{{"selection", to_string(options.selection)},
              {"resample_validation_per_round", options.resample_validation_per_round},
              {"literal_round_training", options.literal_round_training}};
}

// Groups column values by system and reduces each group to its mean,
// aligned over the sorted system names.
std::vector<NamedColumn> to_system_level(const std::vector<NamedColumn>& columns,
                                         const std::vector<std::string>& systems) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    groups[systems[i]].push_back(i);
  }
  std::vector<NamedColumn> reduced;
  reduced.reserve(columns.size());
  for (const NamedColumn& column : columns) {
    NamedColumn out{column.name, {}};
    out.values.reserve(groups.size());
    for (const auto& [system, indices] : groups) {
      double sum = 0.0;
      for (std::size_t i : indices) sum += column.values[i];
      out.values.push_back(sum / static_cast<double>(indices.size()));
    }
    reduced.push_back(std::move(out));
  }
  return reduced;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string leaderboard_cell(double v) {
  return std::isnan(v) ? "NA" : format_fixed(v, 4);
}

}  // namespace

ScoreColumns load_score_file(const std::filesystem::path& path) {
  ScoreColumns columns;
  for_each_jsonl(path, [&](const Json& record, std::size_t record_no) {
    if (!record.contains("id") || !record.contains("metric") || !record.contains("score")) {
      throw DataError("score record " + std::to_string(record_no) +
                      " needs id, metric and score fields");
    }
    const auto id = record["id"].get<std::string>();
    const auto metric = record["metric"].get<std::string>();
    if (!record["score"].is_number()) {
      throw DataError("non-numeric score at record " + std::to_string(record_no));
    }
    columns[metric][id] = record["score"].get<double>();
  });
  return columns;
}

void write_score_file(const std::filesystem::path& path, const std::vector<RawScore>& scores) {
  std::vector<Json> records;
  records.reserve(scores.size());
  for (const RawScore& s : scores) {
    Json record{{"id", s.id}, {"metric", s.metric}, {"score", s.value}};
    if (!s.system.empty()) record["system"] = s.system;
    records.push_back(std::move(record));
  }
  write_jsonl(path, records);
}

std::vector<std::string> lexical_metric_names() {
  return {"bleu_1", "bleu_2", "bleu_3", "bleu_4", "tfidf",
          "rouge_1", "rouge_2", "rouge_3", "rouge_l"};
}

std::vector<std::pair<std::string, double>> lexical_scores(
    const std::string& summary, const std::string& reference_or_document,
    const TfIdfStats& stats) {
  const auto cand = metric_tokenize(summary);
  const auto ref = metric_tokenize(reference_or_document);
  std::vector<std::pair<std::string, double>> scores;
  scores.reserve(9);
  for (int n = 1; n <= 4; ++n) {
    scores.emplace_back("bleu_" + std::to_string(n), bleu(cand, ref, n));
  }
  scores.emplace_back("tfidf", tfidf_cosine(summary, reference_or_document, stats));
  for (int n = 1; n <= 3; ++n) {
    scores.emplace_back("rouge_" + std::to_string(n), rouge_n(cand, ref, n).f1);
  }
  scores.emplace_back("rouge_l", rouge_l(cand, ref).f1);
  return scores;
}

CorrelationExperimentResult run_correlation_experiment(
    const std::vector<const ScorerModel*>& models, const std::vector<AnnotatedExample>& test_set,
    const ScoreColumns& external, const ExperimentOptions& options) {
  if (test_set.empty()) {
    throw DataError("correlation experiment needs a non-empty test set");
  }
  for (const AnnotatedExample& ex : test_set) {
    for (QualityDimension d : kAllDimensions) {
      if (!ex.has_aggregated(d)) {
        throw DataError("example " + ex.id + " lacks an aggregated score for " + to_string(d));
      }
    }
  }

  CorrelationExperimentResult result;
  const ScoreOptions score_options{options.clamp_scores};
  std::vector<NamedColumn> metric_columns;

  for (const ScorerModel* model : models) {
    if (model == nullptr) continue;
    NamedColumn column{learned_metric_name(*model), {}};
    column.values.reserve(test_set.size());
    for (const AnnotatedExample& ex : test_set) {
      // The summary/reference ablation arm scores against the reference.
      const std::string& first = model->pairing() == PairingKind::kSummaryReference
                                     ? ex.reference
                                     : ex.document;
      column.values.push_back(predict(*model, first, ex.summary, score_options));
    }
    metric_columns.push_back(std::move(column));
  }

  if (options.include_lexical) {
    TfIdfStats stats;
    for (const AnnotatedExample& ex : test_set) {
      stats.add_document(ex.document);
    }
    std::vector<NamedColumn> lexical;
    for (const std::string& name : lexical_metric_names()) {
      lexical.push_back({name, {}});
    }
    for (const AnnotatedExample& ex : test_set) {
      const auto scores = lexical_scores(ex.summary, comparison_text(ex), stats);
      for (std::size_t m = 0; m < scores.size(); ++m) {
        lexical[m].values.push_back(scores[m].second);
      }
    }
    for (auto& column : lexical) {
      metric_columns.push_back(std::move(column));
    }
  }

  for (const auto& [metric, by_id] : external) {
    NamedColumn column{metric, {}};
    column.values.reserve(test_set.size());
    for (const AnnotatedExample& ex : test_set) {
      const auto it = by_id.find(ex.id);
      if (it == by_id.end()) {
        throw DataError("external metric '" + metric + "' is missing example " + ex.id);
      }
      column.values.push_back(it->second);
    }
    metric_columns.push_back(std::move(column));
  }

  std::vector<NamedColumn> human_columns;
  for (QualityDimension d : kAllDimensions) {
    NamedColumn column{to_string(d), {}};
    column.values.reserve(test_set.size());
    for (const AnnotatedExample& ex : test_set) {
      column.values.push_back(ex.gold(d));
    }
    human_columns.push_back(std::move(column));
  }

  for (const NamedColumn& column : metric_columns) {
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      result.raw.push_back({test_set[i].id, column.name, column.values[i], {}});
    }
  }
  for (const NamedColumn& column : human_columns) {
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      result.raw.push_back({test_set[i].id, kGoldPrefix + column.name, column.values[i], {}});
    }
  }

  if (options.system_level) {
    std::vector<std::string> systems;
    systems.reserve(test_set.size());
    for (const AnnotatedExample& ex : test_set) systems.push_back(ex.system);
    metric_columns = to_system_level(metric_columns, systems);
    human_columns = to_system_level(human_columns, systems);
  }

  result.table = correlation_table(metric_columns, human_columns);
  result.config = Json{{"experiment", "correlation"},
                       {"examples", test_set.size()},
                       {"system_level", options.system_level},
                       {"clamp_scores", options.clamp_scores},
                       {"include_lexical", options.include_lexical}};
  return result;
}

namespace {

CorrelationResult test_correlation_for(const ScorerModel& model,
                                       const std::vector<AnnotatedExample>& test_set,
                                       const ExperimentOptions& experiment) {
  const ScoreOptions score_options{experiment.clamp_scores};
  std::vector<double> predicted;
  std::vector<double> gold;
  predicted.reserve(test_set.size());
  gold.reserve(test_set.size());
  for (const AnnotatedExample& ex : test_set) {
    const std::string& first = model.pairing() == PairingKind::kSummaryReference
                                   ? ex.reference
                                   : ex.document;
    predicted.push_back(predict(model, first, ex.summary, score_options));
    gold.push_back(ex.gold(model.dimension()));
  }
  return correlate(predicted, gold);
}

}  // namespace

AblationSeries run_volume_sweep(const ScorerModel& m0, const DatasetSplit& split,
                                const OptimizerConfig& config, const TrainerOptions& options,
                                const std::vector<std::size_t>& volumes,
                                const ExperimentOptions& experiment) {
  if (volumes.empty()) {
    throw DataError("volume sweep needs at least one target volume");
  }
  for (std::size_t i = 1; i < volumes.size(); ++i) {
    if (volumes[i] <= volumes[i - 1]) {
      throw DataError("volumes must be strictly increasing");
    }
  }
  std::vector<std::size_t> cumulative{0};
  for (const auto& part : split.unlabeled_parts) {
    cumulative.push_back(cumulative.back() + part.size());
  }
  if (volumes.back() > cumulative.back()) {
    throw DataError("unlabeled pool of " + std::to_string(cumulative.back()) +
                    " cannot supply a volume of " + std::to_string(volumes.back()));
  }
  if (split.test.empty()) {
    throw DataError("volume sweep needs a test set");
  }

  AblationSeries series;
  for (std::size_t volume : volumes) {
    std::size_t k = 0;
    while (cumulative[k] < volume) ++k;
    SemiSupervisedResult run = semi_supervised_train(m0, split, config, options, k);
    const CorrelationResult c = test_correlation_for(*run.best, split.test, experiment);
    series.x.push_back(static_cast<double>(volume));
    series.pearson.push_back(c.pearson);
    series.spearman.push_back(c.spearman);
    series.rounds_used.push_back(static_cast<int>(k));
  }
  series.config = Json{{"experiment", "volume_sweep"},
                       {"dimension", to_string(m0.dimension())},
                       {"volumes", volumes},
                       {"optimizer", optimizer_json(config)},
                       {"trainer", trainer_json(options)}};
  return series;
}

InputModeAblationResult run_input_mode_ablation(const ScorerModel& m0, const DatasetSplit& split,
                                                const OptimizerConfig& config,
                                                const TrainerOptions& options, std::size_t k,
                                                const ExperimentOptions& experiment) {
  if (m0.mode() != InputMode::kPaired) {
    throw DataError("the input-mode ablation applies to the paired dimensions only");
  }
  if (m0.pairing() != PairingKind::kDocumentSummary) {
    throw DataError("pass the document/summary model as the ablation baseline");
  }
  for (const auto* set : {&split.train, &split.validation, &split.test}) {
    for (const AnnotatedExample& ex : *set) {
      if (ex.reference.empty()) {
        throw DataError("example " + ex.id + " has no reference summary; " +
                        "the summary/reference arm cannot run");
      }
    }
  }

  const auto arm_config = [&](PairingKind pairing) {
    return Json{{"experiment", "input_mode_ablation"},
                {"dimension", to_string(m0.dimension())},
                {"pairing", to_string(pairing)},
                {"rounds", k},
                {"optimizer", optimizer_json(config)},
                {"trainer", trainer_json(options)}};
  };

  InputModeAblationResult result;

  result.document_summary.pairing = PairingKind::kDocumentSummary;
  result.document_summary.config = arm_config(PairingKind::kDocumentSummary);
  SemiSupervisedResult doc_run = semi_supervised_train(m0, split, config, options, k);
  result.document_summary.test_correlation =
      test_correlation_for(*doc_run.best, split.test, experiment);
  result.document_summary.state = std::move(doc_run.state);
  result.document_summary.best = std::move(doc_run.best);

  ScorerModel sref_m0(m0.dimension(), m0.mode(), m0.encoder().clone(), m0.head(),
                      PairingKind::kSummaryReference, m0.model_id());
  sref_m0.set_layout(m0.layout());
  result.summary_reference.pairing = PairingKind::kSummaryReference;
  result.summary_reference.config = arm_config(PairingKind::kSummaryReference);
  SemiSupervisedResult sref_run = semi_supervised_train(sref_m0, split, config, options, k);
  result.summary_reference.test_correlation =
      test_correlation_for(*sref_run.best, split.test, experiment);
  result.summary_reference.state = std::move(sref_run.state);
  result.summary_reference.best = std::move(sref_run.best);

  return result;
}

DiversityExport export_diversity_scatter(
    const std::vector<std::pair<std::string, const ScorerModel*>>& models,
    const std::vector<AnnotatedExample>& examples, double rouge_threshold,
    double human_threshold, const ExperimentOptions& options) {
  if (models.empty()) {
    throw DataError("diversity export needs at least one model");
  }
  const QualityDimension dimension = models.front().second->dimension();
  for (const auto& [tag, model] : models) {
    if (model->dimension() != dimension) {
      throw DataError("diversity export models must share one dimension");
    }
  }

  DiversityExport exported;
  exported.dimension = dimension;
  exported.rouge_threshold = rouge_threshold;
  exported.human_threshold = human_threshold;
  const ScoreOptions score_options{options.clamp_scores};

  for (const AnnotatedExample& ex : examples) {
    if (ex.reference.empty()) {
      throw DataError("example " + ex.id + " has no reference; cannot compute lexical overlap");
    }
    ++exported.candidates;
    const double rouge1 = rouge_n(ex.summary, ex.reference, 1).f1;
    const double human = ex.gold(dimension);
    if (rouge1 >= rouge_threshold || human <= human_threshold) continue;
    ++exported.selected;
    for (const auto& [tag, model] : models) {
      const std::string& first = model->pairing() == PairingKind::kSummaryReference
                                     ? ex.reference
                                     : ex.document;
      exported.records.push_back(
          {ex.id, tag, human, predict(*model, first, ex.summary, score_options), rouge1});
    }
  }
  exported.empty_warning = exported.selected == 0;
  return exported;
}

void write_diversity_export(const std::filesystem::path& path, const DiversityExport& exported) {
  std::vector<Json> records;
  records.push_back(Json{{"type", "header"},
                         {"dimension", to_string(exported.dimension)},
                         {"rouge_threshold", exported.rouge_threshold},
                         {"human_threshold", exported.human_threshold},
                         {"candidates", exported.candidates},
                         {"selected", exported.selected}});
  for (const DiversityRecord& r : exported.records) {
    records.push_back(Json{{"id", r.id},
                           {"model", r.model_tag},
                           {"human", r.human},
                           {"score", r.model_score},
                           {"rouge_1", r.rouge1_f1}});
  }
  write_jsonl(path, records);
}

LeaderboardResult build_leaderboard(const std::vector<UnlabeledExample>& entries,
                                    const std::vector<const ScorerModel*>& models,
                                    const ScoreColumns& external,
                                    const ExperimentOptions& options) {
  if (entries.empty()) {
    throw DataError("leaderboard needs at least one system output");
  }
  std::array<const ScorerModel*, 4> by_dimension{nullptr, nullptr, nullptr, nullptr};
  for (const ScorerModel* model : models) {
    if (model == nullptr) continue;
    by_dimension[dimension_index(model->dimension())] = model;
  }

  const auto doc_key = [](const UnlabeledExample& ex) {
    if (!ex.doc_id.empty()) return ex.doc_id;
    const std::uint64_t h = fnv1a64(ex.document.data(), ex.document.size());
    return "doc#" + std::to_string(h);
  };
  const auto external_value = [&](const std::string& metric,
                                  const std::string& id) -> std::optional<double> {
    const auto metric_it = external.find(metric);
    if (metric_it == external.end()) return std::nullopt;
    const auto it = metric_it->second.find(id);
    if (it == metric_it->second.end()) return std::nullopt;
    return it->second;
  };

  std::set<std::string> universe;
  std::map<std::string, std::vector<const UnlabeledExample*>> by_system;
  for (const UnlabeledExample& ex : entries) {
    universe.insert(doc_key(ex));
    by_system[ex.system].push_back(&ex);
  }

  LeaderboardResult result;
  const ScoreOptions score_options{options.clamp_scores};

  for (const auto& [system, members] : by_system) {
    LeaderboardRow row;
    row.system = system;
    row.summaries = members.size();

    std::set<std::string> covered;
    std::vector<double> r1, r2, rl;
    std::array<std::vector<double>, 4> dims;
    for (const UnlabeledExample* ex : members) {
      covered.insert(doc_key(*ex));

      const auto push_rouge = [&](const char* metric, std::vector<double>& sink,
                                  auto&& compute) {
        if (const auto v = external_value(metric, ex->id)) {
          sink.push_back(*v);
        } else if (!ex->reference.empty()) {
          sink.push_back(compute());
        }
      };
      push_rouge("rouge_1", r1, [&] { return rouge_n(ex->summary, ex->reference, 1).f1; });
      push_rouge("rouge_2", r2, [&] { return rouge_n(ex->summary, ex->reference, 2).f1; });
      push_rouge("rouge_l", rl, [&] { return rouge_l(ex->summary, ex->reference).f1; });

      for (QualityDimension d : kAllDimensions) {
        const std::size_t di = dimension_index(d);
        if (const auto v = external_value(to_string(d), ex->id)) {
          dims[di].push_back(*v);
        } else if (by_dimension[di] != nullptr) {
          dims[di].push_back(predict(*by_dimension[di], ex->document, ex->summary,
                                     score_options));
        }
      }
    }

    row.partial = covered != universe;
    row.rouge_1 = mean_of(r1);
    row.rouge_2 = mean_of(r2);
    row.rouge_l = mean_of(rl);
    for (QualityDimension d : kAllDimensions) {
      row.dimension_means[dimension_index(d)] = mean_of(dims[dimension_index(d)]);
    }
    result.rows.push_back(row);

    for (const UnlabeledExample* ex : members) {
      for (QualityDimension d : kAllDimensions) {
        const std::size_t di = dimension_index(d);
        if (const auto v = external_value(to_string(d), ex->id)) {
          result.raw.push_back({ex->id, to_string(d), *v, system});
        } else if (by_dimension[di] != nullptr) {
          result.raw.push_back({ex->id, to_string(d),
                                predict(*by_dimension[di], ex->document, ex->summary,
                                        score_options),
                                system});
        }
      }
    }
  }
  return result;
}

void write_leaderboard_csv(const std::filesystem::path& path, const LeaderboardResult& result) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write leaderboard: " + path.string());
  }
  out << "system,rouge_1,rouge_2,rouge_l,coherence,consistency,fluency,relevance,"
         "summaries,partial\n";
  for (const LeaderboardRow& row : result.rows) {
    out << row.system << ',' << leaderboard_cell(row.rouge_1) << ','
        << leaderboard_cell(row.rouge_2) << ',' << leaderboard_cell(row.rouge_l);
    for (QualityDimension d : kAllDimensions) {
      out << ',' << leaderboard_cell(row.dimension_means[dimension_index(d)]);
    }
    out << ',' << row.summaries << ',' << (row.partial ? "true" : "false") << '\n';
  }
}

std::string config_fingerprint(const Json& config) {
  const std::string canonical = config.dump();
  const std::uint64_t h = fnv1a64(canonical.data(), canonical.size());
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

}  // namespace summscore
