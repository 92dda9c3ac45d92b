#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "summscore/encoding.hpp"

namespace summscore {

// Contract for the sequence encoder behind every scorer: a flat parameter
// vector, a deterministic forward pass producing the pooled feature vector
// for the whole input, and reverse-mode parameter gradients.
class SequenceEncoder {
 public:
  virtual ~SequenceEncoder() = default;

  virtual int embedding_dim() const = 0;
  virtual int max_positions() const = 0;
  virtual std::string kind() const = 0;

  virtual Eigen::Index parameter_count() const = 0;
  virtual const Eigen::VectorXd& parameters() const = 0;
  virtual void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta) = 0;

  // Pooled feature vector of dimension embedding_dim(); a pure function of
  // (parameters, input).
  virtual Eigen::VectorXd forward(const TokenSequence& input) const = 0;

  // Accumulates J^T * output_grad into param_grad, where J is the Jacobian
  // of forward() w.r.t. the parameter vector. param_grad has
  // parameter_count() entries and is added to, not overwritten.
  virtual void accumulate_gradient(const TokenSequence& input,
                                   const Eigen::Ref<const Eigen::VectorXd>& output_grad,
                                   Eigen::Ref<Eigen::VectorXd> param_grad) const = 0;

  virtual bool trainable() const { return parameter_count() > 0; }

  virtual std::unique_ptr<SequenceEncoder> clone() const = 0;

  // Writes manifest + parameter blob into dir (created if needed).
  virtual void save(const std::filesystem::path& dir) const = 0;
};

struct TinyEncoderConfig {
  int buckets = 64;        // token ids are re-bucketed modulo this count
  int dim = 16;            // embedding / output dimension
  int max_positions = 64;  // longest supported input
  std::uint64_t seed = 0;  // parameter initialization seed
};

// Desk-scale reference encoder: a hashed token-embedding table with
// position-weighted mean pooling,
//   forward(t_0..t_{L-1}) = (1/L) * sum_i w[i] * E[:, t_i mod buckets].
// Differentiable in every parameter and fully determined by the seed.
class TinyTestEncoder : public SequenceEncoder {
 public:
  explicit TinyTestEncoder(const TinyEncoderConfig& config);

  int embedding_dim() const override { return config_.dim; }
  int max_positions() const override { return config_.max_positions; }
  std::string kind() const override { return "tiny"; }

  Eigen::Index parameter_count() const override { return theta_.size(); }
  const Eigen::VectorXd& parameters() const override { return theta_; }
  void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta) override;

  Eigen::VectorXd forward(const TokenSequence& input) const override;
  void accumulate_gradient(const TokenSequence& input,
                           const Eigen::Ref<const Eigen::VectorXd>& output_grad,
                           Eigen::Ref<Eigen::VectorXd> param_grad) const override;

  std::unique_ptr<SequenceEncoder> clone() const override;
  void save(const std::filesystem::path& dir) const override;

  const TinyEncoderConfig& config() const { return config_; }

  // Parameter layout: column-major dim x buckets embedding table, then
  // max_positions pooling weights.
  Eigen::Map<const Eigen::MatrixXd> embeddings() const;
  Eigen::Map<const Eigen::VectorXd> position_weights() const;

 private:
  int bucket_of(int token_id) const;

  TinyEncoderConfig config_;
  Eigen::VectorXd theta_;
};

// Adapter for externally computed encoders: a lookup table mapping
// sequence_hash(input) to a precomputed pooled feature vector, exported from
// whatever model produced it. It has no trainable parameters, so training on
// top of it fits only the regression head (a frozen-encoder fine-tune).
class PrecomputedEncoder : public SequenceEncoder {
 public:
  PrecomputedEncoder(int dim, int max_positions,
                     std::map<std::uint64_t, Eigen::VectorXd> features);

  int embedding_dim() const override { return dim_; }
  int max_positions() const override { return max_positions_; }
  std::string kind() const override { return "precomputed"; }

  Eigen::Index parameter_count() const override { return 0; }
  const Eigen::VectorXd& parameters() const override { return empty_; }
  void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta) override;

  Eigen::VectorXd forward(const TokenSequence& input) const override;
  void accumulate_gradient(const TokenSequence& input,
                           const Eigen::Ref<const Eigen::VectorXd>& output_grad,
                           Eigen::Ref<Eigen::VectorXd> param_grad) const override;

  std::unique_ptr<SequenceEncoder> clone() const override;
  void save(const std::filesystem::path& dir) const override;

  std::size_t table_size() const { return features_.size(); }

 private:
  int dim_;
  int max_positions_;
  std::map<std::uint64_t, Eigen::VectorXd> features_;
  Eigen::VectorXd empty_;
};

// Builds a precomputed feature table by running src over the given inputs.
std::unique_ptr<PrecomputedEncoder> precompute_features(
    const SequenceEncoder& src, const std::vector<TokenSequence>& inputs);

// Loads any encoder checkpoint directory; dispatches on the manifest's
// "kind" entry.
std::unique_ptr<SequenceEncoder> load_encoder(const std::filesystem::path& dir);

}  // namespace summscore
