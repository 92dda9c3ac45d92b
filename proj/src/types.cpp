#include "summscore/types.hpp"

namespace summscore {

std::string to_string(QualityDimension d) {
  switch (d) {
    case QualityDimension::kCoherence: return "coherence";
    case QualityDimension::kConsistency: return "consistency";
    case QualityDimension::kFluency: return "fluency";
    case QualityDimension::kRelevance: return "relevance";
  }
  throw std::invalid_argument("unknown dimension");
}

std::string to_string(InputMode m) {
  return m == InputMode::kPaired ? "paired" : "summary_only";
}

std::string to_string(PairingKind p) {
  return p == PairingKind::kDocumentSummary ? "document_summary" : "summary_reference";
}

QualityDimension dimension_from_string(const std::string& s) {
  for (QualityDimension d : kAllDimensions) {
    if (to_string(d) == s) return d;
  }
  throw DataError("unknown quality dimension: " + s);
}

InputMode input_mode_from_string(const std::string& s) {
  if (s == "paired") return InputMode::kPaired;
  if (s == "summary_only") return InputMode::kSummaryOnly;
  throw DataError("unknown input mode: " + s);
}

PairingKind pairing_from_string(const std::string& s) {
  if (s == "document_summary") return PairingKind::kDocumentSummary;
  if (s == "summary_reference") return PairingKind::kSummaryReference;
  throw DataError("unknown pairing: " + s);
}

}  // namespace summscore
