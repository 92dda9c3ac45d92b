#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "summscore/corpus.hpp"
#include "summscore/lexmetrics.hpp"
#include "summscore/stats.hpp"
#include "summscore/trainer.hpp"

namespace summscore {

// metric name -> (example id -> score); the ingestion format for score
// columns computed outside this pipeline.
using ScoreColumns = std::map<std::string, std::unordered_map<std::string, double>>;

struct RawScore {
  std::string id;
  std::string metric;
  double value = 0.0;
  std::string system;  // filled by leaderboard exports
};

ScoreColumns load_score_file(const std::filesystem::path& path);
void write_score_file(const std::filesystem::path& path, const std::vector<RawScore>& scores);

// The lexical baseline battery; reference_or_document is the comparison text
// (the reference summary when available, else the source document).
std::vector<std::pair<std::string, double>> lexical_scores(
    const std::string& summary, const std::string& reference_or_document,
    const TfIdfStats& stats);
std::vector<std::string> lexical_metric_names();

struct ExperimentOptions {
  bool include_lexical = true;
  bool clamp_scores = true;
  // Correlate per-system score means instead of per-summary scores.
  bool system_level = false;
};

struct CorrelationExperimentResult {
  CorrelationTable table;
  std::vector<RawScore> raw;  // per-example scores incl. gold:<dimension> rows
  Json config;
};

// Scores every test example with every requested metric column (learned
// models, lexical baselines, ingested external columns) and correlates each
// column against each dimension's aggregated human scores.
CorrelationExperimentResult run_correlation_experiment(
    const std::vector<const ScorerModel*>& models, const std::vector<AnnotatedExample>& test_set,
    const ScoreColumns& external = {}, const ExperimentOptions& options = {});

struct AblationSeries {
  std::vector<double> x;  // requested pseudo-data volumes, strictly increasing
  std::vector<double> pearson;
  std::vector<double> spearman;
  std::vector<int> rounds_used;
  Json config;
};

// Trains one full semi-supervised run per requested pseudo-data volume
// (0 = supervised only) and records the best model's test-set correlation.
AblationSeries run_volume_sweep(const ScorerModel& m0, const DatasetSplit& split,
                                const OptimizerConfig& config, const TrainerOptions& options,
                                const std::vector<std::size_t>& volumes,
                                const ExperimentOptions& experiment = {});

struct AblationArm {
  PairingKind pairing = PairingKind::kDocumentSummary;
  CorrelationResult test_correlation;
  TrainRunState state;
  std::unique_ptr<ScorerModel> best;
  Json config;
};

struct InputModeAblationResult {
  AblationArm document_summary;
  AblationArm summary_reference;
};

// Trains two models identical except for the pairing (document/summary vs
// summary/reference) and reports both test correlations side by side. Only
// the paired dimensions (Consistency, Relevance) qualify, and the examples
// must carry references.
InputModeAblationResult run_input_mode_ablation(const ScorerModel& m0, const DatasetSplit& split,
                                                const OptimizerConfig& config,
                                                const TrainerOptions& options, std::size_t k,
                                                const ExperimentOptions& experiment = {});

struct DiversityRecord {
  std::string id;
  std::string model_tag;
  double human = 0.0;
  double model_score = 0.0;
  double rouge1_f1 = 0.0;
};

struct DiversityExport {
  QualityDimension dimension = QualityDimension::kRelevance;
  double rouge_threshold = 0.3;
  double human_threshold = 4.0;
  std::size_t candidates = 0;   // examples inspected
  std::size_t selected = 0;     // examples passing both thresholds
  bool empty_warning = false;
  std::vector<DiversityRecord> records;
};

// Selects examples whose summaries diverge lexically from the reference
// (ROUGE-1 f1 below the threshold) yet score high with humans, and emits
// (human score, model score) pairs per tagged model for external plotting.
DiversityExport export_diversity_scatter(
    const std::vector<std::pair<std::string, const ScorerModel*>>& models,
    const std::vector<AnnotatedExample>& examples, double rouge_threshold = 0.3,
    double human_threshold = 4.0, const ExperimentOptions& options = {});

void write_diversity_export(const std::filesystem::path& path, const DiversityExport& exported);

struct LeaderboardRow {
  std::string system;
  double rouge_1 = std::numeric_limits<double>::quiet_NaN();
  double rouge_2 = std::numeric_limits<double>::quiet_NaN();
  double rouge_l = std::numeric_limits<double>::quiet_NaN();
  std::array<double, 4> dimension_means{
      std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  std::size_t summaries = 0;
  bool partial = false;  // the system is missing summaries for some documents
};

struct LeaderboardResult {
  std::vector<LeaderboardRow> rows;  // sorted by system name
  std::vector<RawScore> raw;
};

// Per-system mean dimension scores plus ROUGE-1/2/L against the provided
// references. Dimension scores come from the trained models keyed by
// dimension, with external columns taking precedence when present (offline
// audits and ingested full-scale score files).
LeaderboardResult build_leaderboard(const std::vector<UnlabeledExample>& entries,
                                    const std::vector<const ScorerModel*>& models,
                                    const ScoreColumns& external = {},
                                    const ExperimentOptions& options = {});

void write_leaderboard_csv(const std::filesystem::path& path, const LeaderboardResult& result);

// Content fingerprint of a configuration object (canonical JSON, FNV-1a).
std::string config_fingerprint(const Json& config);

}  // namespace summscore
