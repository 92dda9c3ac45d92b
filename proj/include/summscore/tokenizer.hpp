#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace summscore {

// Surface tokenization shared by the encoder tokenizer and the lexical
// metrics: lowercase (ASCII), split on Unicode whitespace, ASCII punctuation
// emitted as standalone tokens. Returns an empty list for empty input.
std::vector<std::string> split_tokens(std::string_view text);

struct Tokenization {
  std::vector<int> ids;
  std::vector<std::string> surfaces;  // kept for diagnostics, aligned with ids
};

// Deterministic hash-bucket tokenizer for the encoder input pipeline.
// Token ids 0 and 1 are reserved for [CLS] and [SEP]; surface tokens map to
// 2 + fnv1a64(token) % buckets.
class HashTokenizer {
 public:
  static constexpr int kClsId = 0;
  static constexpr int kSepId = 1;
  static constexpr int kSpecialTokens = 2;

  explicit HashTokenizer(int buckets = 4096);

  // Throws EncodingError if the text has no tokens after normalization.
  Tokenization tokenize(std::string_view text) const;

  int buckets() const { return buckets_; }
  int vocab_size() const { return buckets_ + kSpecialTokens; }

 private:
  int buckets_;
};

}  // namespace summscore
