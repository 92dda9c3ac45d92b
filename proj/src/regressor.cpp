#include "summscore/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "summscore/jsonl.hpp"
#include "summscore/random.hpp"

namespace summscore {

RegressionHead::RegressionHead(int input_dim, int hidden)
    : input_dim_(input_dim), hidden_(hidden) {
  if (input_dim < 1 || hidden < 0) {
    throw std::invalid_argument("bad regression head shape");
  }
  const Eigen::Index count =
      hidden == 0 ? input_dim + 1
                  : static_cast<Eigen::Index>(hidden) * input_dim + hidden + hidden + 1;
  params_ = Eigen::VectorXd::Zero(count);
}

RegressionHead RegressionHead::seeded(int input_dim, int hidden, std::uint64_t seed) {
  RegressionHead head(input_dim, hidden);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (Eigen::Index i = 0; i + 1 < head.params_.size(); ++i) {
    head.params_[i] = scale * rng.normal();
  }
  return head;  // final bias stays 0
}

void RegressionHead::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& params) {
  if (params.size() != params_.size()) {
    throw std::invalid_argument("head parameter size mismatch");
  }
  params_ = params;
}

Eigen::Map<const Eigen::VectorXd> RegressionHead::weights() const {
  if (hidden_ != 0) {
    throw std::logic_error("weights() is only defined for the affine head");
  }
  return {params_.data(), input_dim_};
}

double RegressionHead::bias() const {
  if (hidden_ != 0) {
    throw std::logic_error("bias() is only defined for the affine head");
  }
  return params_[input_dim_];
}

void RegressionHead::set_affine(const Eigen::Ref<const Eigen::VectorXd>& weights, double bias) {
  if (hidden_ != 0 || weights.size() != input_dim_) {
    throw std::invalid_argument("set_affine needs an affine head of matching dim");
  }
  params_.head(input_dim_) = weights;
  params_[input_dim_] = bias;
}

double RegressionHead::value(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  if (features.size() != input_dim_) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  if (hidden_ == 0) {
    return params_.head(input_dim_).dot(features) + params_[input_dim_];
  }
  const Eigen::Map<const Eigen::MatrixXd> w1(params_.data(), hidden_, input_dim_);
  const Eigen::Map<const Eigen::VectorXd> b1(
      params_.data() + static_cast<Eigen::Index>(hidden_) * input_dim_, hidden_);
  const Eigen::Map<const Eigen::VectorXd> w2(
      params_.data() + static_cast<Eigen::Index>(hidden_) * input_dim_ + hidden_, hidden_);
  const double b2 = params_[params_.size() - 1];
  const Eigen::VectorXd activation = ((w1 * features) + b1).array().tanh();
  return w2.dot(activation) + b2;
}

void RegressionHead::accumulate_gradient(const Eigen::Ref<const Eigen::VectorXd>& features,
                                         double dy, Eigen::Ref<Eigen::VectorXd> head_grad,
                                         Eigen::Ref<Eigen::VectorXd> feature_grad) const {
  if (head_grad.size() != params_.size() || feature_grad.size() != input_dim_) {
    throw std::invalid_argument("gradient buffer size mismatch");
  }
  if (hidden_ == 0) {
    head_grad.head(input_dim_).noalias() += dy * features;
    head_grad[input_dim_] += dy;
    feature_grad.noalias() += dy * params_.head(input_dim_);
    return;
  }
  const Eigen::Index w1_size = static_cast<Eigen::Index>(hidden_) * input_dim_;
  const Eigen::Map<const Eigen::MatrixXd> w1(params_.data(), hidden_, input_dim_);
  const Eigen::Map<const Eigen::VectorXd> b1(params_.data() + w1_size, hidden_);
  const Eigen::Map<const Eigen::VectorXd> w2(params_.data() + w1_size + hidden_, hidden_);
  const Eigen::VectorXd pre = (w1 * features) + b1;
  const Eigen::VectorXd activation = pre.array().tanh();
  const Eigen::VectorXd dz =
      (dy * w2.array() * (1.0 - activation.array().square())).matrix();
  Eigen::Map<Eigen::MatrixXd>(head_grad.data(), hidden_, input_dim_).noalias() +=
      dz * features.transpose();
  head_grad.segment(w1_size, hidden_).noalias() += dz;
  head_grad.segment(w1_size + hidden_, hidden_).noalias() += dy * activation;
  head_grad[params_.size() - 1] += dy;
  feature_grad.noalias() += w1.transpose() * dz;
}

ScorerModel::ScorerModel(QualityDimension dimension, InputMode mode,
                         std::unique_ptr<SequenceEncoder> encoder, RegressionHead head,
                         PairingKind pairing, std::string model_id)
    : dimension_(dimension),
      mode_(mode),
      pairing_(pairing),
      model_id_(std::move(model_id)),
      encoder_(std::move(encoder)),
      head_(std::move(head)),
      tokenizer_() {
  if (!encoder_) {
    throw std::invalid_argument("scorer needs an encoder");
  }
  if (mode != input_mode_for(dimension)) {
    throw std::invalid_argument("input mode " + to_string(mode) +
                                " is not valid for dimension " + to_string(dimension));
  }
  if (head_.input_dim() != encoder_->embedding_dim()) {
    throw std::invalid_argument("head dimension does not match encoder embedding_dim");
  }
  if (pairing == PairingKind::kSummaryReference && mode != InputMode::kPaired) {
    throw std::invalid_argument("summary/reference pairing requires paired mode");
  }
  layout_.max_length = std::min(512, encoder_->max_positions());
}

ScorerModel ScorerModel::make(QualityDimension dimension,
                              std::unique_ptr<SequenceEncoder> encoder, RegressionHead head,
                              PairingKind pairing, std::string model_id) {
  return {dimension, input_mode_for(dimension), std::move(encoder), std::move(head), pairing,
          std::move(model_id)};
}

void ScorerModel::set_layout(const LayoutOptions& layout) {
  if (layout.max_length > encoder_->max_positions()) {
    throw std::invalid_argument("layout max_length exceeds encoder max_positions");
  }
  layout_ = layout;
}

ScorerModel ScorerModel::clone() const {
  ScorerModel copy(dimension_, mode_, encoder_->clone(), head_, pairing_, model_id_);
  copy.layout_ = layout_;
  return copy;
}

Eigen::Index ScorerModel::parameter_count() const {
  return encoder_->parameter_count() + head_.parameter_count();
}

Eigen::VectorXd ScorerModel::parameter_vector() const {
  Eigen::VectorXd params(parameter_count());
  params.head(encoder_->parameter_count()) = encoder_->parameters();
  params.tail(head_.parameter_count()) = head_.parameters();
  return params;
}

void ScorerModel::set_parameter_vector(const Eigen::Ref<const Eigen::VectorXd>& params) {
  if (params.size() != parameter_count()) {
    throw std::invalid_argument("model parameter size mismatch");
  }
  encoder_->set_parameters(params.head(encoder_->parameter_count()));
  head_.set_parameters(params.tail(head_.parameter_count()));
}

std::uint64_t ScorerModel::parameter_hash() const {
  const Eigen::VectorXd params = parameter_vector();
  return fnv1a64(params.data(), static_cast<std::size_t>(params.size()) * sizeof(double));
}

TokenSequence build_model_input(const ScorerModel& model, std::string_view text_a,
                                std::string_view text_b) {
  if (model.mode() == InputMode::kSummaryOnly) {
    const Tokenization b = model.tokenizer().tokenize(text_b);
    return build_input({}, b.ids, InputMode::kSummaryOnly, model.layout());
  }
  const Tokenization a = model.tokenizer().tokenize(text_a);
  const Tokenization b = model.tokenizer().tokenize(text_b);
  const FlexibleSegment flexible = model.pairing() == PairingKind::kSummaryReference
                                       ? FlexibleSegment::kSecond
                                       : FlexibleSegment::kFirst;
  return build_input(a.ids, b.ids, InputMode::kPaired, model.layout(), flexible);
}

double score_sequence(const ScorerModel& model, const TokenSequence& input) {
  return model.head().value(model.encoder().forward(input));
}

namespace {

TokenSequence input_for_pair(const ScorerModel& model, std::string_view document,
                             std::string_view summary) {
  if (model.mode() == InputMode::kSummaryOnly) {
    return build_model_input(model, {}, summary);
  }
  if (model.pairing() == PairingKind::kSummaryReference) {
    // The first slot is the summary (protected); `document` carries the
    // reference text for this pairing.
    return build_model_input(model, summary, document);
  }
  return build_model_input(model, document, summary);
}

}  // namespace

double predict(const ScorerModel& model, std::string_view document, std::string_view summary,
               const ScoreOptions& options) {
  double score = score_sequence(model, input_for_pair(model, document, summary));
  if (options.clamp_report) {
    score = std::clamp(score, options.clamp_low, options.clamp_high);
  }
  return score;
}

std::vector<double> predict_batch(const ScorerModel& model, std::span<const TextPair> pairs,
                                  const ScoreOptions& options) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      scores.push_back(predict(model, pairs[i].document, pairs[i].summary, options));
    } catch (const EncodingError& e) {
      throw EncodingError("item " + std::to_string(i) + ": " + e.what());
    }
  }
  return scores;
}

double batch_loss(const ScorerModel& model, std::span<const TrainItem> batch) {
  if (batch.empty()) {
    throw std::invalid_argument("batch_loss needs a non-empty batch");
  }
  double sum = 0.0;
  for (const TrainItem& item : batch) {
    const double y = score_sequence(model, build_model_input(model, item.text_a, item.text_b));
    const double r = y - item.target;
    sum += r * r;
  }
  return sum / static_cast<double>(batch.size());
}

BatchGradient batch_gradient(const ScorerModel& model, std::span<const TrainItem> batch) {
  if (batch.empty()) {
    throw std::invalid_argument("batch_gradient needs a non-empty batch");
  }
  const Eigen::Index encoder_params = model.encoder().parameter_count();
  BatchGradient out;
  out.gradient = Eigen::VectorXd::Zero(model.parameter_count());
  auto encoder_grad = out.gradient.head(encoder_params);
  auto head_grad = out.gradient.tail(model.head().parameter_count());

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Eigen::VectorXd feature_grad(model.encoder().embedding_dim());
  for (const TrainItem& item : batch) {
    const TokenSequence input = build_model_input(model, item.text_a, item.text_b);
    const Eigen::VectorXd features = model.encoder().forward(input);
    const double y = model.head().value(features);
    const double residual = y - item.target;
    out.loss += residual * residual * inv_n;
    const double dy = 2.0 * residual * inv_n;
    feature_grad.setZero();
    model.head().accumulate_gradient(features, dy, head_grad, feature_grad);
    if (encoder_params > 0) {
      model.encoder().accumulate_gradient(input, feature_grad, encoder_grad);
    }
  }
  return out;
}

void OptimizerConfig::validate() const {
  if (learning_rate < 0 || weight_decay < 0 || batch_size < 1 || epochs_per_round < 0 ||
      warmup_fraction < 0 || warmup_fraction >= 1.0) {
    throw std::invalid_argument("bad optimizer configuration");
  }
}

double ScheduleState::learning_rate_for(long one_based_step, double base_rate) const {
  if (warmup_steps <= 0 || one_based_step >= warmup_steps) {
    return base_rate;
  }
  return base_rate * static_cast<double>(one_based_step) / static_cast<double>(warmup_steps);
}

ScheduleState make_round_schedule(std::size_t dataset_size, const OptimizerConfig& config,
                                  std::uint64_t round_seed) {
  config.validate();
  ScheduleState schedule;
  const long steps_per_epoch = static_cast<long>(
      (dataset_size + static_cast<std::size_t>(config.batch_size) - 1) /
      static_cast<std::size_t>(config.batch_size));
  schedule.total_steps = steps_per_epoch * config.epochs_per_round;
  schedule.warmup_steps = static_cast<long>(
      std::ceil(config.warmup_fraction * static_cast<double>(schedule.total_steps)));
  schedule.round_seed = round_seed;
  return schedule;
}

void train_one_epoch(ScorerModel& model, std::span<const TrainItem> data,
                     const OptimizerConfig& config, ScheduleState& schedule) {
  config.validate();
  if (data.empty()) {
    throw std::invalid_argument("train_one_epoch needs data");
  }

  const Eigen::Index param_count = model.parameter_count();
  if (schedule.adam_m.size() == 0) {
    schedule.adam_m = Eigen::VectorXd::Zero(param_count);
    schedule.adam_v = Eigen::VectorXd::Zero(param_count);
  } else if (schedule.adam_m.size() != param_count) {
    throw std::invalid_argument("schedule state belongs to a different model");
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(schedule.round_seed, static_cast<std::uint64_t>(schedule.epochs_done)));
  rng.shuffle(order);

  const Eigen::Index encoder_params = model.encoder().parameter_count();
  const Eigen::Index first_trainable = config.freeze_encoder ? encoder_params : 0;

  Eigen::VectorXd params = model.parameter_vector();
  std::vector<TrainItem> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));

  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(config.batch_size)) {
    batch.clear();
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(data[order[i]]);
    }

    const BatchGradient bg = batch_gradient(model, batch);
    if (!std::isfinite(bg.loss)) {
      throw DivergenceError("non-finite loss at step " +
                            std::to_string(schedule.steps_done + 1) + " (epoch " +
                            std::to_string(schedule.epochs_done + 1) + ")");
    }

    ++schedule.steps_done;
    const double lr = schedule.learning_rate_for(schedule.steps_done, config.learning_rate);
    const double bias1 =
        1.0 - std::pow(config.adam_beta1, static_cast<double>(schedule.steps_done));
    const double bias2 =
        1.0 - std::pow(config.adam_beta2, static_cast<double>(schedule.steps_done));

    for (Eigen::Index i = first_trainable; i < param_count; ++i) {
      const double g = bg.gradient[i];
      schedule.adam_m[i] = config.adam_beta1 * schedule.adam_m[i] + (1.0 - config.adam_beta1) * g;
      schedule.adam_v[i] =
          config.adam_beta2 * schedule.adam_v[i] + (1.0 - config.adam_beta2) * g * g;
      const double m_hat = schedule.adam_m[i] / bias1;
      const double v_hat = schedule.adam_v[i] / bias2;
      // Decoupled weight decay: the decay term bypasses the moment estimates.
      params[i] -= lr * (m_hat / (std::sqrt(v_hat) + config.adam_epsilon) +
                         config.weight_decay * params[i]);
    }
    model.set_parameter_vector(params);
  }

  ++schedule.epochs_done;
}

void save_checkpoint(const ScorerModel& model, const std::filesystem::path& dir,
                     const std::vector<std::pair<std::string, std::string>>& provenance) {
  std::filesystem::create_directories(dir);
  model.encoder().save(dir / "encoder");
  const Eigen::VectorXd& head = model.head().parameters();
  write_double_blob(dir / "head.bin", head.data(), static_cast<std::size_t>(head.size()));
  std::vector<std::pair<std::string, std::string>> manifest{
      {"dimension", to_string(model.dimension())},
      {"mode", to_string(model.mode())},
      {"pairing", to_string(model.pairing())},
      {"model_id", model.model_id()},
      {"head_hidden", std::to_string(model.head().hidden())},
      {"max_length", std::to_string(model.layout().max_length)},
  };
  for (const auto& entry : provenance) {
    manifest.push_back({"provenance." + entry.first, entry.second});
  }
  write_kv_manifest(dir / "model.manifest", manifest);
}

ScorerModel load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest = read_kv_manifest(dir / "model.manifest");
  auto encoder = load_encoder(dir / "encoder");
  const int hidden = std::stoi(manifest_value(manifest, "head_hidden"));
  RegressionHead head(encoder->embedding_dim(), hidden);
  const std::vector<double> blob = read_double_blob(dir / "head.bin");
  if (blob.size() != static_cast<std::size_t>(head.parameter_count())) {
    throw DataError("head blob size mismatch in " + dir.string());
  }
  head.set_parameters(Eigen::Map<const Eigen::VectorXd>(
      blob.data(), static_cast<Eigen::Index>(blob.size())));
  ScorerModel model(dimension_from_string(manifest_value(manifest, "dimension")),
                    input_mode_from_string(manifest_value(manifest, "mode")),
                    std::move(encoder), std::move(head),
                    pairing_from_string(manifest_value(manifest, "pairing")),
                    manifest_value(manifest, "model_id"));
  LayoutOptions layout = model.layout();
  layout.max_length = std::stoi(manifest_value(manifest, "max_length"));
  model.set_layout(layout);
  return model;
}

}  // namespace summscore
