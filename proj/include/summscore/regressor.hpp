#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "summscore/encoder.hpp"
#include "summscore/tokenizer.hpp"
#include "summscore/types.hpp"

namespace summscore {

// Regression head over the pooled feature vector. The default is the affine
// map y = W.h + b; hidden > 0 selects a one-hidden-layer tanh variant
// y = w2.tanh(W1 h + b1) + b2.
class RegressionHead {
 public:
  RegressionHead(int input_dim, int hidden = 0);
  static RegressionHead seeded(int input_dim, int hidden, std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  int hidden() const { return hidden_; }

  Eigen::Index parameter_count() const { return params_.size(); }
  const Eigen::VectorXd& parameters() const { return params_; }
  void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& params);

  // Affine accessors (throw for the hidden-layer variant).
  Eigen::Map<const Eigen::VectorXd> weights() const;
  double bias() const;
  void set_affine(const Eigen::Ref<const Eigen::VectorXd>& weights, double bias);

  double value(const Eigen::Ref<const Eigen::VectorXd>& features) const;

  // Given dL/dy, adds the head-parameter gradient into head_grad and
  // dL/dfeatures into feature_grad.
  void accumulate_gradient(const Eigen::Ref<const Eigen::VectorXd>& features, double dy,
                           Eigen::Ref<Eigen::VectorXd> head_grad,
                           Eigen::Ref<Eigen::VectorXd> feature_grad) const;

 private:
  int input_dim_;
  int hidden_;
  Eigen::VectorXd params_;
};

// One quality-dimension scorer: encoder + regression head + the input-layout
// binding. Construction enforces the mode/dimension binding (Consistency and
// Relevance are paired; Coherence and Fluency are summary-only).
class ScorerModel {
 public:
  ScorerModel(QualityDimension dimension, InputMode mode,
              std::unique_ptr<SequenceEncoder> encoder, RegressionHead head,
              PairingKind pairing = PairingKind::kDocumentSummary,
              std::string model_id = {});

  // Convenience factory with the mode derived from the dimension.
  static ScorerModel make(QualityDimension dimension, std::unique_ptr<SequenceEncoder> encoder,
                          RegressionHead head,
                          PairingKind pairing = PairingKind::kDocumentSummary,
                          std::string model_id = {});

  QualityDimension dimension() const { return dimension_; }
  InputMode mode() const { return mode_; }
  PairingKind pairing() const { return pairing_; }
  const std::string& model_id() const { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }

  const SequenceEncoder& encoder() const { return *encoder_; }
  SequenceEncoder& encoder() { return *encoder_; }
  const RegressionHead& head() const { return head_; }
  RegressionHead& head() { return head_; }
  const HashTokenizer& tokenizer() const { return tokenizer_; }
  const LayoutOptions& layout() const { return layout_; }
  void set_layout(const LayoutOptions& layout);

  ScorerModel clone() const;

  // Flat view over [encoder parameters; head parameters].
  Eigen::Index parameter_count() const;
  Eigen::VectorXd parameter_vector() const;
  void set_parameter_vector(const Eigen::Ref<const Eigen::VectorXd>& params);
  std::uint64_t parameter_hash() const;

 private:
  QualityDimension dimension_;
  InputMode mode_;
  PairingKind pairing_;
  std::string model_id_;
  std::unique_ptr<SequenceEncoder> encoder_;
  RegressionHead head_;
  HashTokenizer tokenizer_;
  LayoutOptions layout_;
};

// Lays out the two input texts for the model. text_a fills the first paired
// slot and must be empty for summary-only mode; with the summary/reference
// pairing text_a is the summary (protected) and text_b the reference
// (truncatable).
TokenSequence build_model_input(const ScorerModel& model, std::string_view text_a,
                                std::string_view text_b);

// Raw (unclamped) score of a laid-out input.
double score_sequence(const ScorerModel& model, const TokenSequence& input);

struct ScoreOptions {
  bool clamp_report = true;  // clamp reported scores into [clamp_low, clamp_high]
  double clamp_low = 1.0;
  double clamp_high = 5.0;
};

// Scores a (document, summary) pair through the model's input binding. For
// summary/reference-paired models the first argument carries the reference.
double predict(const ScorerModel& model, std::string_view document, std::string_view summary,
               const ScoreOptions& options = {});

struct TextPair {
  std::string document;
  std::string summary;
};

// Element-wise predict, order preserving; per-item failures are rethrown
// with the item index attached.
std::vector<double> predict_batch(const ScorerModel& model, std::span<const TextPair> pairs,
                                  const ScoreOptions& options = {});

// One training example with its texts already arranged for the model's
// binding (text_a empty for summary-only inputs).
struct TrainItem {
  std::string text_a;
  std::string text_b;
  double target = 0.0;
};

// Mean squared residual over the batch.
double batch_loss(const ScorerModel& model, std::span<const TrainItem> batch);

struct BatchGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // layout matches ScorerModel::parameter_vector
};
BatchGradient batch_gradient(const ScorerModel& model, std::span<const TrainItem> batch);

struct OptimizerConfig {
  double learning_rate = 2e-5;
  double weight_decay = 0.01;
  int batch_size = 4;
  int epochs_per_round = 6;
  double warmup_fraction = 0.1;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool freeze_encoder = false;  // diagnostics only

  void validate() const;
};

// Per-round optimizer state: Adam moments plus the linear-warmup schedule
// over warmup_fraction of the round's planned steps.
struct ScheduleState {
  long total_steps = 0;
  long warmup_steps = 0;
  long steps_done = 0;
  int epochs_done = 0;
  std::uint64_t round_seed = 0;
  Eigen::VectorXd adam_m;
  Eigen::VectorXd adam_v;

  double learning_rate_for(long one_based_step, double base_rate) const;
};

ScheduleState make_round_schedule(std::size_t dataset_size, const OptimizerConfig& config,
                                  std::uint64_t round_seed);

// One seeded-shuffled pass over the data in batches of config.batch_size,
// Adam with decoupled weight decay, warmup per the schedule. Throws
// DivergenceError on a non-finite loss.
void train_one_epoch(ScorerModel& model, std::span<const TrainItem> data,
                     const OptimizerConfig& config, ScheduleState& schedule);

// Checkpoint directory: encoder checkpoint + head blob + plain-text
// manifest (dimension, mode, pairing, id, provenance entries).
void save_checkpoint(const ScorerModel& model, const std::filesystem::path& dir,
                     const std::vector<std::pair<std::string, std::string>>& provenance = {});
ScorerModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace summscore
