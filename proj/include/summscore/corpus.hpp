#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "summscore/jsonl.hpp"
#include "summscore/types.hpp"

namespace summscore {

// A (document, summary) pair with per-dimension human scores. Crowd scores
// are carried as metadata only; supervision uses the expert mean.
struct AnnotatedExample {
  std::string id;
  std::string document;
  std::string summary;
  std::string system;
  std::string reference;  // optional single reference summary
  std::string doc_id;     // optional document key (leaderboard grouping)
  std::array<std::vector<double>, 4> expert_scores;
  std::array<std::vector<double>, 4> crowd_scores;
  std::array<double, 4> aggregated{
      std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};

  bool has_aggregated(QualityDimension d) const;
  // Aggregated expert score; throws DataError if aggregation has not run.
  double gold(QualityDimension d) const;
};

struct UnlabeledExample {
  std::string id;
  std::string document;
  std::string summary;
  std::string system;
  std::string reference;  // optional
  std::string doc_id;     // optional
};

// One model-annotated example produced in semi-supervised round `round`.
struct PseudoLabeledExample {
  UnlabeledExample base;
  double pseudo_score = 0.0;
  std::string labeling_model_id;
  int round = 0;
};

struct DatasetSplit {
  std::vector<AnnotatedExample> train;
  std::vector<AnnotatedExample> validation;
  std::vector<AnnotatedExample> test;
  std::vector<std::vector<UnlabeledExample>> unlabeled_parts;
  std::uint64_t seed = 0;
};

// Record (de)serialization for the line-delimited dataset format. Unknown
// fields are rejected so that load/serialize round-trips are lossless.
Json to_json(const AnnotatedExample& ex);
Json to_json(const UnlabeledExample& ex);
AnnotatedExample annotated_from_json(const Json& record, std::size_t record_no,
                                     bool require_scores = true);
UnlabeledExample unlabeled_from_json(const Json& record, std::size_t record_no);

// Loads annotated examples; every record must carry non-empty per-dimension
// expert score lists with values in [1, 5]. Malformed records raise DataError
// naming the 1-based record index.
std::vector<AnnotatedExample> load_annotated(const std::filesystem::path& path);
void save_annotated(const std::filesystem::path& path,
                    const std::vector<AnnotatedExample>& examples);

std::vector<UnlabeledExample> load_unlabeled(const std::filesystem::path& path);
void save_unlabeled(const std::filesystem::path& path,
                    const std::vector<UnlabeledExample>& examples);

// Converter from the upstream SummEval annotation layout (fields: id, text,
// decoded, model_id, expert_annotations, turker_annotations, references).
std::vector<AnnotatedExample> load_summeval(const std::filesystem::path& path);

// Fills aggregated[d] with the arithmetic mean of expert_scores[d] for every
// dimension; the input is otherwise unchanged.
AnnotatedExample aggregate_expert_scores(AnnotatedExample example);

// Deterministic seeded split into disjoint (train, test) of the exact
// requested sizes.
std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>> split_annotated(
    const std::vector<AnnotatedExample>& examples, std::size_t train_n, std::size_t test_n,
    std::uint64_t seed);

// Draws a validation set of size n out of train; the remainder is returned
// as the reduced training set (validation examples leave the pool).
std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>> sample_validation(
    const std::vector<AnnotatedExample>& train, std::size_t n, std::uint64_t seed);

// Random partition into k parts whose sizes differ by at most one.
std::vector<std::vector<UnlabeledExample>> partition_unlabeled(
    const std::vector<UnlabeledExample>& pool, std::size_t k, std::uint64_t seed);

// Split manifest: ids per split plus the seed, enough to reconstruct and
// audit any split.
void write_split_manifest(const std::filesystem::path& path, const DatasetSplit& split,
                          const std::string& fingerprint);
Json split_manifest_json(const DatasetSplit& split, const std::string& fingerprint);

}  // namespace summscore
