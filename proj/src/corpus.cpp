#include "summscore/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "summscore/random.hpp"

namespace summscore {

namespace {

[[noreturn]] void record_error(std::size_t record_no, const std::string& message) {
  throw DataError(message + " at record " + std::to_string(record_no));
}

std::string require_string(const Json& record, const char* key, std::size_t record_no,
                           bool allow_empty = false) {
  if (!record.contains(key)) {
    record_error(record_no, std::string("missing field '") + key + "'");
  }
  if (!record[key].is_string()) {
    record_error(record_no, std::string("field '") + key + "' must be a string");
  }
  std::string value = record[key].get<std::string>();
  if (value.empty() && !allow_empty) {
    record_error(record_no, std::string("field '") + key + "' is empty");
  }
  return value;
}

std::string optional_string(const Json& record, const char* key, std::size_t record_no) {
  if (!record.contains(key)) return {};
  if (!record[key].is_string()) {
    record_error(record_no, std::string("field '") + key + "' must be a string");
  }
  return record[key].get<std::string>();
}

std::array<std::vector<double>, 4> parse_score_map(const Json& value, const char* key,
                                                   std::size_t record_no, bool check_range) {
  std::array<std::vector<double>, 4> scores;
  if (!value.is_object()) {
    record_error(record_no, std::string("field '") + key + "' must be an object");
  }
  for (const auto& [name, list] : value.items()) {
    QualityDimension d;
    try {
      d = dimension_from_string(name);
    } catch (const DataError&) {
      record_error(record_no, std::string("unknown dimension '") + name + "' in '" + key + "'");
    }
    if (!list.is_array()) {
      record_error(record_no, std::string("scores for '") + name + "' must be an array");
    }
    for (const auto& s : list) {
      if (!s.is_number()) {
        record_error(record_no, std::string("non-numeric score for '") + name + "'");
      }
      const double v = s.get<double>();
      if (check_range && (v < 1.0 || v > 5.0)) {
        record_error(record_no, "score out of range");
      }
      scores[dimension_index(d)].push_back(v);
    }
  }
  return scores;
}

void check_known_fields(const Json& record, std::size_t record_no,
                        std::initializer_list<const char*> known) {
  for (const auto& [key, value] : record.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      record_error(record_no, "unknown field '" + key + "'");
    }
  }
}

Json score_map_json(const std::array<std::vector<double>, 4>& scores) {
  Json map = Json::object();
  for (QualityDimension d : kAllDimensions) {
    const auto& list = scores[dimension_index(d)];
    if (!list.empty()) {
      map[to_string(d)] = list;
    }
  }
  return map;
}

std::vector<std::string> collect_ids(const std::vector<AnnotatedExample>& examples) {
  std::vector<std::string> ids;
  ids.reserve(examples.size());
  for (const auto& ex : examples) ids.push_back(ex.id);
  return ids;
}

}  // namespace

bool AnnotatedExample::has_aggregated(QualityDimension d) const {
  return !std::isnan(aggregated[dimension_index(d)]);
}

double AnnotatedExample::gold(QualityDimension d) const {
  if (!has_aggregated(d)) {
    throw DataError("example " + id + " has no aggregated score for " + to_string(d));
  }
  return aggregated[dimension_index(d)];
}

Json to_json(const AnnotatedExample& ex) {
  Json record{{"id", ex.id},
              {"document", ex.document},
              {"summary", ex.summary},
              {"system", ex.system}};
  if (!ex.reference.empty()) record["reference"] = ex.reference;
  if (!ex.doc_id.empty()) record["doc_id"] = ex.doc_id;
  Json experts = score_map_json(ex.expert_scores);
  if (!experts.empty()) record["expert_scores"] = std::move(experts);
  Json crowd = score_map_json(ex.crowd_scores);
  if (!crowd.empty()) record["crowd_scores"] = std::move(crowd);
  Json aggregated = Json::object();
  for (QualityDimension d : kAllDimensions) {
    if (ex.has_aggregated(d)) aggregated[to_string(d)] = ex.aggregated[dimension_index(d)];
  }
  if (!aggregated.empty()) record["aggregated"] = std::move(aggregated);
  return record;
}

Json to_json(const UnlabeledExample& ex) {
  Json record{{"id", ex.id},
              {"document", ex.document},
              {"summary", ex.summary},
              {"system", ex.system}};
  if (!ex.reference.empty()) record["reference"] = ex.reference;
  if (!ex.doc_id.empty()) record["doc_id"] = ex.doc_id;
  return record;
}

AnnotatedExample annotated_from_json(const Json& record, std::size_t record_no,
                                     bool require_scores) {
  check_known_fields(record, record_no,
                     {"id", "document", "summary", "system", "reference", "doc_id",
                      "expert_scores", "crowd_scores", "aggregated"});
  AnnotatedExample ex;
  ex.id = require_string(record, "id", record_no);
  ex.document = require_string(record, "document", record_no);
  ex.summary = require_string(record, "summary", record_no);
  ex.system = require_string(record, "system", record_no, /*allow_empty=*/true);
  ex.reference = optional_string(record, "reference", record_no);
  ex.doc_id = optional_string(record, "doc_id", record_no);

  if (record.contains("expert_scores")) {
    ex.expert_scores = parse_score_map(record["expert_scores"], "expert_scores", record_no,
                                       /*check_range=*/true);
  }
  if (require_scores) {
    for (QualityDimension d : kAllDimensions) {
      if (ex.expert_scores[dimension_index(d)].empty()) {
        record_error(record_no, "missing expert scores for '" + to_string(d) + "'");
      }
    }
  }
  if (record.contains("crowd_scores")) {
    ex.crowd_scores = parse_score_map(record["crowd_scores"], "crowd_scores", record_no,
                                      /*check_range=*/true);
  }
  if (record.contains("aggregated")) {
    const Json& agg = record["aggregated"];
    if (!agg.is_object()) {
      record_error(record_no, "field 'aggregated' must be an object");
    }
    for (const auto& [name, value] : agg.items()) {
      const QualityDimension d = dimension_from_string(name);
      if (!value.is_number()) {
        record_error(record_no, "aggregated score for '" + name + "' must be a number");
      }
      const double v = value.get<double>();
      const auto& experts = ex.expert_scores[dimension_index(d)];
      if (!experts.empty()) {
        const double mean =
            std::accumulate(experts.begin(), experts.end(), 0.0) / experts.size();
        if (std::abs(mean - v) > 1e-9) {
          record_error(record_no, "aggregated score for '" + name +
                                      "' does not equal the expert mean");
        }
      }
      ex.aggregated[dimension_index(d)] = v;
    }
  }
  return ex;
}

UnlabeledExample unlabeled_from_json(const Json& record, std::size_t record_no) {
  check_known_fields(record, record_no,
                     {"id", "document", "summary", "system", "reference", "doc_id"});
  UnlabeledExample ex;
  ex.id = require_string(record, "id", record_no);
  ex.document = require_string(record, "document", record_no);
  ex.summary = require_string(record, "summary", record_no);
  ex.system = require_string(record, "system", record_no, /*allow_empty=*/true);
  ex.reference = optional_string(record, "reference", record_no);
  ex.doc_id = optional_string(record, "doc_id", record_no);
  return ex;
}

std::vector<AnnotatedExample> load_annotated(const std::filesystem::path& path) {
  std::vector<AnnotatedExample> examples;
  std::unordered_set<std::string> ids;
  for_each_jsonl(path, [&](const Json& record, std::size_t record_no) {
    AnnotatedExample ex = annotated_from_json(record, record_no);
    if (!ids.insert(ex.id).second) {
      record_error(record_no, "duplicate id '" + ex.id + "'");
    }
    examples.push_back(std::move(ex));
  });
  return examples;
}

void save_annotated(const std::filesystem::path& path,
                    const std::vector<AnnotatedExample>& examples) {
  std::vector<Json> records;
  records.reserve(examples.size());
  for (const auto& ex : examples) records.push_back(to_json(ex));
  write_jsonl(path, records);
}

std::vector<UnlabeledExample> load_unlabeled(const std::filesystem::path& path) {
  std::vector<UnlabeledExample> examples;
  std::unordered_set<std::string> ids;
  for_each_jsonl(path, [&](const Json& record, std::size_t record_no) {
    UnlabeledExample ex = unlabeled_from_json(record, record_no);
    if (!ids.insert(ex.id).second) {
      record_error(record_no, "duplicate id '" + ex.id + "'");
    }
    examples.push_back(std::move(ex));
  });
  return examples;
}

void save_unlabeled(const std::filesystem::path& path,
                    const std::vector<UnlabeledExample>& examples) {
  std::vector<Json> records;
  records.reserve(examples.size());
  for (const auto& ex : examples) records.push_back(to_json(ex));
  write_jsonl(path, records);
}

std::vector<AnnotatedExample> load_summeval(const std::filesystem::path& path) {
  std::vector<AnnotatedExample> examples;
  std::unordered_set<std::string> ids;
  for_each_jsonl(path, [&](const Json& record, std::size_t record_no) {
    AnnotatedExample ex;
    ex.id = require_string(record, "id", record_no);
    ex.document = require_string(record, "text", record_no);
    ex.summary = require_string(record, "decoded", record_no);
    ex.system = optional_string(record, "model_id", record_no);
    if (record.contains("references") && record["references"].is_array() &&
        !record["references"].empty()) {
      ex.reference = record["references"][0].get<std::string>();
    }
    const auto read_annotations = [&](const char* key,
                                      std::array<std::vector<double>, 4>& out) {
      if (!record.contains(key)) return;
      if (!record[key].is_array()) {
        record_error(record_no, std::string("field '") + key + "' must be an array");
      }
      for (const Json& annotation : record[key]) {
        for (QualityDimension d : kAllDimensions) {
          const std::string name = to_string(d);
          if (!annotation.contains(name)) {
            record_error(record_no, "annotation missing dimension '" + name + "'");
          }
          const double v = annotation[name].get<double>();
          if (v < 1.0 || v > 5.0) {
            record_error(record_no, "score out of range");
          }
          out[dimension_index(d)].push_back(v);
        }
      }
    };
    read_annotations("expert_annotations", ex.expert_scores);
    read_annotations("turker_annotations", ex.crowd_scores);
    for (QualityDimension d : kAllDimensions) {
      if (ex.expert_scores[dimension_index(d)].empty()) {
        record_error(record_no, "missing expert annotations");
      }
    }
    // Make ids unique across systems: upstream reuses the story id.
    if (!ex.system.empty() && ids.count(ex.id)) {
      ex.id += "#" + ex.system;
    }
    if (!ids.insert(ex.id).second) {
      record_error(record_no, "duplicate id '" + ex.id + "'");
    }
    examples.push_back(std::move(ex));
  });
  return examples;
}

AnnotatedExample aggregate_expert_scores(AnnotatedExample example) {
  for (QualityDimension d : kAllDimensions) {
    const auto& scores = example.expert_scores[dimension_index(d)];
    if (scores.empty()) {
      throw DataError("example " + example.id + " has no expert scores for " + to_string(d));
    }
    example.aggregated[dimension_index(d)] =
        std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
  }
  return example;
}

std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>> split_annotated(
    const std::vector<AnnotatedExample>& examples, std::size_t train_n, std::size_t test_n,
    std::uint64_t seed) {
  if (train_n + test_n > examples.size()) {
    throw DataError("split needs " + std::to_string(train_n + test_n) +
                    " examples but only " + std::to_string(examples.size()) + " are available");
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x73706c6974));  // "split"
  rng.shuffle(order);
  std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>> out;
  out.first.reserve(train_n);
  out.second.reserve(test_n);
  for (std::size_t i = 0; i < train_n; ++i) out.first.push_back(examples[order[i]]);
  for (std::size_t i = 0; i < test_n; ++i) out.second.push_back(examples[order[train_n + i]]);
  return out;
}

std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>> sample_validation(
    const std::vector<AnnotatedExample>& train, std::size_t n, std::uint64_t seed) {
  if (n > train.size()) {
    throw DataError("validation sample of " + std::to_string(n) +
                    " exceeds training pool of " + std::to_string(train.size()));
  }
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x76616c69));  // "vali"
  rng.shuffle(order);
  std::vector<bool> in_validation(train.size(), false);
  std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>> out;
  out.first.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.first.push_back(train[order[i]]);
    in_validation[order[i]] = true;
  }
  out.second.reserve(train.size() - n);
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!in_validation[i]) out.second.push_back(train[i]);
  }
  return out;
}

std::vector<std::vector<UnlabeledExample>> partition_unlabeled(
    const std::vector<UnlabeledExample>& pool, std::size_t k, std::uint64_t seed) {
  if (k < 1) {
    throw DataError("partition needs k >= 1");
  }
  if (pool.size() < k) {
    throw DataError("cannot partition " + std::to_string(pool.size()) + " items into " +
                    std::to_string(k) + " parts");
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x70617274));  // "part"
  rng.shuffle(order);
  const std::size_t base = pool.size() / k;
  const std::size_t remainder = pool.size() % k;
  std::vector<std::vector<UnlabeledExample>> parts(k);
  std::size_t cursor = 0;
  for (std::size_t p = 0; p < k; ++p) {
    const std::size_t size = base + (p < remainder ? 1 : 0);
    parts[p].reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
      parts[p].push_back(pool[order[cursor++]]);
    }
  }
  return parts;
}

Json split_manifest_json(const DatasetSplit& split, const std::string& fingerprint) {
  Json manifest;
  manifest["seed"] = split.seed;
  manifest["fingerprint"] = fingerprint;
  manifest["sizes"] = {{"train", split.train.size()},
                       {"validation", split.validation.size()},
                       {"test", split.test.size()},
                       {"unlabeled_parts", split.unlabeled_parts.size()}};
  manifest["train_ids"] = collect_ids(split.train);
  manifest["validation_ids"] = collect_ids(split.validation);
  manifest["test_ids"] = collect_ids(split.test);
  Json parts = Json::array();
  for (const auto& part : split.unlabeled_parts) {
    Json ids = Json::array();
    for (const auto& ex : part) ids.push_back(ex.id);
    parts.push_back(std::move(ids));
  }
  manifest["unlabeled_part_ids"] = std::move(parts);
  return manifest;
}

void write_split_manifest(const std::filesystem::path& path, const DatasetSplit& split,
                          const std::string& fingerprint) {
  write_jsonl(path, {split_manifest_json(split, fingerprint)});
}

}  // namespace summscore
