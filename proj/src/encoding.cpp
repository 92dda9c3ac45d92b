#include "summscore/encoding.hpp"

#include <string>

#include "summscore/random.hpp"
#include "summscore/tokenizer.hpp"

namespace summscore {

namespace {

void append_segment(std::vector<int>& out, std::span<const int> ids, std::size_t keep) {
  out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep));
}

}  // namespace

TokenSequence build_input(std::span<const int> first_ids,
                          std::span<const int> second_ids, InputMode mode,
                          const LayoutOptions& layout, FlexibleSegment flexible) {
  if (layout.max_length < 3) {
    throw std::invalid_argument("max_length must allow at least [CLS] x [SEP]");
  }
  if (second_ids.empty()) {
    throw EncodingError("summary segment is empty");
  }

  TokenSequence seq;
  seq.mode = mode;

  if (mode == InputMode::kSummaryOnly) {
    if (!first_ids.empty()) {
      throw std::invalid_argument("summary-only input must not carry a first segment");
    }
    const int specials = 2;
    const int needed = static_cast<int>(second_ids.size()) + specials + layout.reserved_positions;
    if (needed > layout.max_length) {
      throw EncodingError("summary too long: " + std::to_string(second_ids.size()) +
                          " tokens exceed max_length " + std::to_string(layout.max_length));
    }
    seq.ids.reserve(second_ids.size() + 2);
    seq.ids.push_back(HashTokenizer::kClsId);
    append_segment(seq.ids, second_ids, second_ids.size());
    seq.ids.push_back(HashTokenizer::kSepId);
    seq.sep_indices = {seq.length() - 1};
    return seq;
  }

  if (first_ids.empty()) {
    throw EncodingError("paired input requires a non-empty first segment");
  }
  const int specials = 3;
  const std::span<const int> flex = flexible == FlexibleSegment::kFirst ? first_ids : second_ids;
  const std::span<const int> kept = flexible == FlexibleSegment::kFirst ? second_ids : first_ids;
  const int budget = layout.max_length - layout.reserved_positions - specials -
                     static_cast<int>(kept.size());
  if (budget < layout.min_flexible_tokens) {
    throw EncodingError("summary too long: protected segment of " +
                        std::to_string(kept.size()) + " tokens leaves no room in max_length " +
                        std::to_string(layout.max_length));
  }
  const std::size_t flex_keep =
      std::min(flex.size(), static_cast<std::size_t>(budget));
  const std::size_t first_keep = flexible == FlexibleSegment::kFirst ? flex_keep : first_ids.size();
  const std::size_t second_keep = flexible == FlexibleSegment::kFirst ? second_ids.size() : flex_keep;

  seq.ids.reserve(first_keep + second_keep + 3);
  seq.ids.push_back(HashTokenizer::kClsId);
  append_segment(seq.ids, first_ids, first_keep);
  seq.ids.push_back(HashTokenizer::kSepId);
  const int first_sep = seq.length() - 1;
  append_segment(seq.ids, second_ids, second_keep);
  seq.ids.push_back(HashTokenizer::kSepId);
  seq.sep_indices = {first_sep, seq.length() - 1};
  return seq;
}

std::uint64_t sequence_hash(const TokenSequence& seq) {
  const unsigned char mode_tag = seq.mode == InputMode::kPaired ? 1 : 2;
  std::uint64_t h = fnv1a64(&mode_tag, 1);
  for (int id : seq.ids) {
    const std::uint32_t v = static_cast<std::uint32_t>(id);
    h = fnv1a64(&v, sizeof(v), h);
  }
  return h;
}

}  // namespace summscore
