#include "summscore/encoder.hpp"

#include <cmath>
#include <cstring>

#include "summscore/jsonl.hpp"
#include "summscore/random.hpp"

namespace summscore {

TinyTestEncoder::TinyTestEncoder(const TinyEncoderConfig& config) : config_(config) {
  if (config.buckets < 1 || config.dim < 1 || config.max_positions < 1) {
    throw std::invalid_argument("tiny encoder config values must be positive");
  }
  const Eigen::Index table = static_cast<Eigen::Index>(config.dim) * config.buckets;
  theta_.resize(table + config.max_positions);
  Rng rng(config.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.dim));
  for (Eigen::Index i = 0; i < table; ++i) {
    theta_[i] = scale * rng.normal();
  }
  // Pooling weights start near plain mean pooling.
  for (Eigen::Index i = table; i < theta_.size(); ++i) {
    theta_[i] = 1.0 + 0.1 * rng.normal();
  }
}

void TinyTestEncoder::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() != theta_.size()) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  theta_ = theta;
}

Eigen::Map<const Eigen::MatrixXd> TinyTestEncoder::embeddings() const {
  return {theta_.data(), config_.dim, config_.buckets};
}

Eigen::Map<const Eigen::VectorXd> TinyTestEncoder::position_weights() const {
  return {theta_.data() + static_cast<Eigen::Index>(config_.dim) * config_.buckets,
          config_.max_positions};
}

int TinyTestEncoder::bucket_of(int token_id) const {
  return token_id % config_.buckets;
}

Eigen::VectorXd TinyTestEncoder::forward(const TokenSequence& input) const {
  const int length = input.length();
  if (length == 0) {
    throw EncodingError("cannot encode an empty sequence");
  }
  if (length > config_.max_positions) {
    throw EncodingError("sequence of " + std::to_string(length) +
                        " tokens exceeds encoder max_positions " +
                        std::to_string(config_.max_positions));
  }
  const auto table = embeddings();
  const auto weights = position_weights();
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(config_.dim);
  for (int i = 0; i < length; ++i) {
    pooled.noalias() += weights[i] * table.col(bucket_of(input.ids[i]));
  }
  pooled /= static_cast<double>(length);
  return pooled;
}

void TinyTestEncoder::accumulate_gradient(const TokenSequence& input,
                                          const Eigen::Ref<const Eigen::VectorXd>& output_grad,
                                          Eigen::Ref<Eigen::VectorXd> param_grad) const {
  const int length = input.length();
  if (length == 0 || length > config_.max_positions) {
    throw EncodingError("gradient requested for an input outside encoder limits");
  }
  if (output_grad.size() != config_.dim || param_grad.size() != theta_.size()) {
    throw std::invalid_argument("gradient buffer size mismatch");
  }
  const auto table = embeddings();
  const auto weights = position_weights();
  const double inv_len = 1.0 / static_cast<double>(length);
  const Eigen::Index table_size = static_cast<Eigen::Index>(config_.dim) * config_.buckets;
  Eigen::Map<Eigen::MatrixXd> grad_table(param_grad.data(), config_.dim, config_.buckets);
  Eigen::Map<Eigen::VectorXd> grad_weights(param_grad.data() + table_size,
                                           config_.max_positions);
  for (int i = 0; i < length; ++i) {
    const int b = bucket_of(input.ids[i]);
    grad_table.col(b).noalias() += inv_len * weights[i] * output_grad;
    grad_weights[i] += inv_len * output_grad.dot(table.col(b));
  }
}

std::unique_ptr<SequenceEncoder> TinyTestEncoder::clone() const {
  return std::make_unique<TinyTestEncoder>(*this);
}

void TinyTestEncoder::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_kv_manifest(dir / "manifest.txt",
                    {{"kind", kind()},
                     {"dim", std::to_string(config_.dim)},
                     {"buckets", std::to_string(config_.buckets)},
                     {"max_positions", std::to_string(config_.max_positions)},
                     {"seed", std::to_string(config_.seed)},
                     {"param_count", std::to_string(theta_.size())}});
  write_double_blob(dir / "params.bin", theta_.data(),
                    static_cast<std::size_t>(theta_.size()));
}

PrecomputedEncoder::PrecomputedEncoder(int dim, int max_positions,
                                       std::map<std::uint64_t, Eigen::VectorXd> features)
    : dim_(dim), max_positions_(max_positions), features_(std::move(features)) {
  if (dim < 1 || max_positions < 1) {
    throw std::invalid_argument("precomputed encoder dims must be positive");
  }
  for (const auto& [key, vec] : features_) {
    if (vec.size() != dim_) {
      throw DataError("precomputed feature for key " + std::to_string(key) +
                      " has wrong dimension");
    }
  }
}

void PrecomputedEncoder::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() != 0) {
    throw std::invalid_argument("precomputed encoder has no parameters");
  }
}

Eigen::VectorXd PrecomputedEncoder::forward(const TokenSequence& input) const {
  const auto it = features_.find(sequence_hash(input));
  if (it == features_.end()) {
    throw EncodingError("no precomputed feature for this input");
  }
  return it->second;
}

void PrecomputedEncoder::accumulate_gradient(const TokenSequence&,
                                             const Eigen::Ref<const Eigen::VectorXd>&,
                                             Eigen::Ref<Eigen::VectorXd>) const {
  // No parameters: the encoder is frozen, gradients stop at the head.
}

std::unique_ptr<SequenceEncoder> PrecomputedEncoder::clone() const {
  return std::make_unique<PrecomputedEncoder>(*this);
}

void PrecomputedEncoder::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_kv_manifest(dir / "manifest.txt",
                    {{"kind", kind()},
                     {"dim", std::to_string(dim_)},
                     {"max_positions", std::to_string(max_positions_)},
                     {"entries", std::to_string(features_.size())}});
  std::vector<double> blob;
  blob.reserve(features_.size() * (1 + static_cast<std::size_t>(dim_)));
  for (const auto& [key, vec] : features_) {
    double key_as_double;
    static_assert(sizeof(key_as_double) == sizeof(key));
    std::memcpy(&key_as_double, &key, sizeof(key));
    blob.push_back(key_as_double);
    blob.insert(blob.end(), vec.data(), vec.data() + vec.size());
  }
  write_double_blob(dir / "features.bin", blob.data(), blob.size());
}

std::unique_ptr<PrecomputedEncoder> precompute_features(
    const SequenceEncoder& src, const std::vector<TokenSequence>& inputs) {
  std::map<std::uint64_t, Eigen::VectorXd> table;
  for (const TokenSequence& seq : inputs) {
    table[sequence_hash(seq)] = src.forward(seq);
  }
  return std::make_unique<PrecomputedEncoder>(src.embedding_dim(), src.max_positions(),
                                              std::move(table));
}

std::unique_ptr<SequenceEncoder> load_encoder(const std::filesystem::path& dir) {
  const auto manifest = read_kv_manifest(dir / "manifest.txt");
  const std::string kind = manifest_value(manifest, "kind");
  if (kind == "tiny") {
    TinyEncoderConfig config;
    config.dim = std::stoi(manifest_value(manifest, "dim"));
    config.buckets = std::stoi(manifest_value(manifest, "buckets"));
    config.max_positions = std::stoi(manifest_value(manifest, "max_positions"));
    config.seed = std::stoull(manifest_value(manifest, "seed"));
    auto encoder = std::make_unique<TinyTestEncoder>(config);
    const std::vector<double> blob = read_double_blob(dir / "params.bin");
    if (blob.size() != static_cast<std::size_t>(encoder->parameter_count())) {
      throw DataError("parameter blob size mismatch in " + dir.string());
    }
    encoder->set_parameters(Eigen::Map<const Eigen::VectorXd>(
        blob.data(), static_cast<Eigen::Index>(blob.size())));
    return encoder;
  }
  if (kind == "precomputed") {
    const int dim = std::stoi(manifest_value(manifest, "dim"));
    const int max_positions = std::stoi(manifest_value(manifest, "max_positions"));
    const auto entries = std::stoull(manifest_value(manifest, "entries"));
    const std::vector<double> blob = read_double_blob(dir / "features.bin");
    const std::size_t stride = 1 + static_cast<std::size_t>(dim);
    if (blob.size() != entries * stride) {
      throw DataError("feature blob size mismatch in " + dir.string());
    }
    std::map<std::uint64_t, Eigen::VectorXd> table;
    for (std::size_t e = 0; e < entries; ++e) {
      std::uint64_t key;
      std::memcpy(&key, &blob[e * stride], sizeof(key));
      Eigen::VectorXd vec = Eigen::Map<const Eigen::VectorXd>(&blob[e * stride + 1], dim);
      table.emplace(key, std::move(vec));
    }
    return std::make_unique<PrecomputedEncoder>(dim, max_positions, std::move(table));
  }
  throw DataError("unknown encoder kind '" + kind + "' in " + dir.string());
}

}  // namespace summscore
