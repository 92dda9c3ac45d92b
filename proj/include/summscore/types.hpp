#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace summscore {

// The four fine-grained quality dimensions, each scored by its own submodel.
enum class QualityDimension { kCoherence = 0, kConsistency = 1, kFluency = 2, kRelevance = 3 };

inline constexpr std::array<QualityDimension, 4> kAllDimensions = {
    QualityDimension::kCoherence,
    QualityDimension::kConsistency,
    QualityDimension::kFluency,
    QualityDimension::kRelevance,
};

inline constexpr std::size_t dimension_index(QualityDimension d) {
  return static_cast<std::size_t>(d);
}

// Layout of the encoder input: a concatenated text pair or the summary alone.
enum class InputMode { kPaired, kSummaryOnly };

// Which two texts a PAIRED model consumes. kDocumentSummary is the standard
// binding; kSummaryReference exists for the input-mode ablation.
enum class PairingKind { kDocumentSummary, kSummaryReference };

// Consistency and Relevance need the source text next to the summary;
// Coherence and Fluency are judged from the summary alone.
inline constexpr InputMode input_mode_for(QualityDimension d) {
  return (d == QualityDimension::kConsistency || d == QualityDimension::kRelevance)
             ? InputMode::kPaired
             : InputMode::kSummaryOnly;
}

std::string to_string(QualityDimension d);
std::string to_string(InputMode m);
std::string to_string(PairingKind p);
QualityDimension dimension_from_string(const std::string& s);
InputMode input_mode_from_string(const std::string& s);
PairingKind pairing_from_string(const std::string& s);

// Malformed or inconsistent input data (files, records, score ranges).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Text that cannot be laid out for the encoder (empty, or too long to fit).
struct EncodingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad command-line usage or configuration.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace summscore
