#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "summscore/types.hpp"

namespace summscore {

// A laid-out encoder input: [CLS] A [SEP] B [SEP] for paired mode,
// [CLS] B [SEP] for summary-only mode (B is the summary slot).
struct TokenSequence {
  std::vector<int> ids;
  int cls_index = 0;
  std::vector<int> sep_indices;
  InputMode mode = InputMode::kSummaryOnly;

  int length() const { return static_cast<int>(ids.size()); }
};

struct LayoutOptions {
  int max_length = 512;
  // Positions kept free at the tail when budgeting the flexible segment.
  int reserved_positions = 1;
  // The flexible segment must keep at least this many tokens in paired mode.
  int min_flexible_tokens = 1;
};

// Which segment may be truncated to fit max_length. The summary is the
// protected segment and is never cut: with the standard document/summary
// pairing the first segment (the document) is flexible; the
// summary/reference ablation protects the first segment instead.
enum class FlexibleSegment { kFirst, kSecond };

// Builds the encoder input layout. first_ids fills the first paired slot
// (empty and unused for summary-only mode); second_ids fills the second slot
// (the summary in the standard binding). Throws EncodingError when the
// protected segment cannot fit ("summary too long").
TokenSequence build_input(std::span<const int> first_ids,
                          std::span<const int> second_ids, InputMode mode,
                          const LayoutOptions& layout = {},
                          FlexibleSegment flexible = FlexibleSegment::kFirst);

// Content hash of a token sequence (mode + ids); keys precomputed feature
// tables.
std::uint64_t sequence_hash(const TokenSequence& seq);

}  // namespace summscore
