#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "summscore/corpus.hpp"
#include "summscore/regressor.hpp"
#include "summscore/stats.hpp"

namespace summscore {

// Validation-set model selection: max Pearson, max Spearman, or the product
// of the two.
enum class SelectionVariant { kMaxPearson, kMaxSpearman, kMaxProduct };

std::string to_string(SelectionVariant v);
SelectionVariant selection_from_string(const std::string& s);

// Degenerate correlations (constant predictions or gold) map to this
// sentinel so that selection can proceed on early, constant-ish models.
inline constexpr double kDegenerateSelectionScore = -1.0;

struct SelectionOutcome {
  double value = kDegenerateSelectionScore;
  double pearson = std::numeric_limits<double>::quiet_NaN();
  double spearman = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
};

// A validation example with texts pre-arranged for the model binding.
struct ValidationItem {
  std::string id;
  std::string text_a;
  std::string text_b;
  double gold = 0.0;
};

// Correlation between raw model predictions and gold labels on the
// validation set, reduced per the selection variant.
SelectionOutcome selection_score(SelectionVariant variant, const ScorerModel& model,
                                 std::span<const ValidationItem> validation);

// Builders that arrange the two input texts for a model's mode and pairing.
TrainItem make_train_item(const AnnotatedExample& example, const ScorerModel& model);
TrainItem make_train_item(const PseudoLabeledExample& example, const ScorerModel& model);
ValidationItem make_validation_item(const AnnotatedExample& example, const ScorerModel& model);
std::vector<TrainItem> make_train_items(const std::vector<AnnotatedExample>& examples,
                                        const ScorerModel& model);
std::vector<ValidationItem> make_validation_items(const std::vector<AnnotatedExample>& examples,
                                                  const ScorerModel& model);

// One audit record per selection-function evaluation.
struct FEvaluation {
  int round = 0;
  int epoch = 0;  // 0 is the round incumbent before any epoch
  SelectionVariant variant = SelectionVariant::kMaxProduct;
  double value = kDegenerateSelectionScore;
  double pearson = std::numeric_limits<double>::quiet_NaN();
  double spearman = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
  std::string model_id;
};

struct RoundResult {
  std::unique_ptr<ScorerModel> best;
  SelectionOutcome best_score;
  int best_epoch = 0;  // 0 means the untrained incumbent won
  bool aborted = false;
  std::string abort_reason;
};

// One selection round: clone m0, train epochs_per_round epochs, evaluate the
// selection function after each epoch, and return the argmax checkpoint.
// The incumbent is the untrained start model; ties keep the earlier
// candidate. Divergence aborts the round and returns the incumbent so far.
RoundResult supervised_round(const ScorerModel& m0, std::span<const TrainItem> train,
                             std::span<const ValidationItem> validation,
                             const OptimizerConfig& config, SelectionVariant variant,
                             int round_index, std::vector<FEvaluation>& audit);

struct PseudoLabelResult {
  std::vector<PseudoLabeledExample> examples;
  std::size_t skipped = 0;  // per-item failures, counted not dropped silently
  std::vector<std::string> skipped_ids;
};

// Labels one unlabeled part with raw (unclamped) model predictions.
PseudoLabelResult pseudo_label(const ScorerModel& model,
                               std::span<const UnlabeledExample> part, int round);

struct TrainerOptions {
  SelectionVariant selection = SelectionVariant::kMaxProduct;
  // Redraw the validation sample from the labeled pool at each
  // semi-supervised round instead of keeping one fixed set.
  bool resample_validation_per_round = false;
  // Train rounds on the labeled set only (the literal loop body) instead of
  // the expanded pseudo-labeled pool.
  bool literal_round_training = false;
};

struct RoundRecord {
  int round = 0;
  std::size_t pool_size = 0;       // |D| after this round's expansion
  std::size_t training_set_size = 0;
  std::size_t pseudo_added = 0;
  std::size_t pseudo_skipped = 0;
  int best_epoch = 0;
  double best_f = kDegenerateSelectionScore;
  bool aborted = false;
  std::uint64_t restart_param_hash = 0;  // parameters the round started from
};

struct TrainRunState {
  std::vector<FEvaluation> audit;
  std::vector<RoundRecord> rounds;
  std::vector<SelectionOutcome> round_best_scores;
  int global_best_round = 0;
  SelectionOutcome global_best_score;
  std::uint64_t m0_param_hash = 0;
  std::uint64_t seed = 0;
};

struct SemiSupervisedResult {
  std::unique_ptr<ScorerModel> best;
  std::vector<std::unique_ptr<ScorerModel>> round_best;  // index = round
  TrainRunState state;
};

// The full semi-supervised procedure: a supervised selection round on the
// labeled training set, then k rounds that (1) pseudo-label the next
// unlabeled part with the previous round's best model, (2) extend the pool,
// (3) retrain from the initial parameters on the pool, and (4) keep the
// global argmax of the selection function. k must not exceed the number of
// prepared parts; k = 0 reduces to the supervised round exactly.
SemiSupervisedResult semi_supervised_train(const ScorerModel& m0, const DatasetSplit& split,
                                           const OptimizerConfig& config,
                                           const TrainerOptions& options, std::size_t k);

// Audit-log export: one line-delimited record per selection evaluation.
void write_audit_log(const std::filesystem::path& path, const TrainRunState& state);
Json train_state_json(const TrainRunState& state);

}  // namespace summscore
