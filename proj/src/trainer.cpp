#include "summscore/trainer.hpp"

#include <cmath>

#include "summscore/random.hpp"

namespace summscore {

std::string to_string(SelectionVariant v) {
  switch (v) {
    case SelectionVariant::kMaxPearson: return "max_pearson";
    case SelectionVariant::kMaxSpearman: return "max_spearman";
    case SelectionVariant::kMaxProduct: return "max_product";
  }
  throw std::invalid_argument("unknown selection variant");
}

SelectionVariant selection_from_string(const std::string& s) {
  if (s == "max_pearson") return SelectionVariant::kMaxPearson;
  if (s == "max_spearman") return SelectionVariant::kMaxSpearman;
  if (s == "max_product") return SelectionVariant::kMaxProduct;
  throw DataError("unknown selection variant: " + s);
}

SelectionOutcome selection_score(SelectionVariant variant, const ScorerModel& model,
                                 std::span<const ValidationItem> validation) {
  if (validation.size() < 2) {
    throw std::invalid_argument("selection needs at least two validation examples");
  }
  std::vector<double> predicted;
  std::vector<double> gold;
  predicted.reserve(validation.size());
  gold.reserve(validation.size());
  for (const ValidationItem& item : validation) {
    predicted.push_back(
        score_sequence(model, build_model_input(model, item.text_a, item.text_b)));
    gold.push_back(item.gold);
  }

  const CorrelationResult c = correlate(predicted, gold);
  SelectionOutcome outcome;
  outcome.pearson = c.pearson;
  outcome.spearman = c.spearman;
  const bool needs_pearson = variant != SelectionVariant::kMaxSpearman;
  const bool needs_spearman = variant != SelectionVariant::kMaxPearson;
  if ((needs_pearson && !c.pearson_defined()) || (needs_spearman && !c.spearman_defined())) {
    outcome.degenerate = true;
    outcome.value = kDegenerateSelectionScore;
    return outcome;
  }
  switch (variant) {
    case SelectionVariant::kMaxPearson: outcome.value = c.pearson; break;
    case SelectionVariant::kMaxSpearman: outcome.value = c.spearman; break;
    case SelectionVariant::kMaxProduct: outcome.value = c.pearson * c.spearman; break;
  }
  return outcome;
}

namespace {

std::pair<std::string, std::string> arrange_texts(const std::string& document,
                                                  const std::string& summary,
                                                  const std::string& reference,
                                                  const std::string& id,
                                                  const ScorerModel& model) {
  if (model.mode() == InputMode::kSummaryOnly) {
    return {std::string{}, summary};
  }
  if (model.pairing() == PairingKind::kSummaryReference) {
    if (reference.empty()) {
      throw DataError("example " + id + " has no reference for summary/reference pairing");
    }
    return {summary, reference};
  }
  return {document, summary};
}

}  // namespace

TrainItem make_train_item(const AnnotatedExample& example, const ScorerModel& model) {
  auto [a, b] = arrange_texts(example.document, example.summary, example.reference,
                              example.id, model);
  return {std::move(a), std::move(b), example.gold(model.dimension())};
}

TrainItem make_train_item(const PseudoLabeledExample& example, const ScorerModel& model) {
  auto [a, b] = arrange_texts(example.base.document, example.base.summary,
                              example.base.reference, example.base.id, model);
  return {std::move(a), std::move(b), example.pseudo_score};
}

ValidationItem make_validation_item(const AnnotatedExample& example, const ScorerModel& model) {
  auto [a, b] = arrange_texts(example.document, example.summary, example.reference,
                              example.id, model);
  return {example.id, std::move(a), std::move(b), example.gold(model.dimension())};
}

std::vector<TrainItem> make_train_items(const std::vector<AnnotatedExample>& examples,
                                        const ScorerModel& model) {
  std::vector<TrainItem> items;
  items.reserve(examples.size());
  for (const auto& ex : examples) items.push_back(make_train_item(ex, model));
  return items;
}

std::vector<ValidationItem> make_validation_items(const std::vector<AnnotatedExample>& examples,
                                                  const ScorerModel& model) {
  std::vector<ValidationItem> items;
  items.reserve(examples.size());
  for (const auto& ex : examples) items.push_back(make_validation_item(ex, model));
  return items;
}

RoundResult supervised_round(const ScorerModel& m0, std::span<const TrainItem> train,
                             std::span<const ValidationItem> validation,
                             const OptimizerConfig& config, SelectionVariant variant,
                             int round_index, std::vector<FEvaluation>& audit) {
  if (train.empty()) {
    throw DataError("supervised round needs training data");
  }
  config.validate();

  const auto push_audit = [&](int epoch, const SelectionOutcome& outcome,
                              const std::string& model_id) {
    audit.push_back({round_index, epoch, variant, outcome.value, outcome.pearson,
                     outcome.spearman, outcome.degenerate, model_id});
  };
  const auto candidate_id = [&](int epoch) {
    return "r" + std::to_string(round_index) + "e" + std::to_string(epoch);
  };

  ScorerModel work = m0.clone();
  ScheduleState schedule = make_round_schedule(
      train.size(), config, mix_seed(config.seed, static_cast<std::uint64_t>(round_index)));

  RoundResult result;
  result.best_score = selection_score(variant, work, validation);
  result.best_epoch = 0;
  result.best = std::make_unique<ScorerModel>(work.clone());
  result.best->set_model_id(candidate_id(0));
  push_audit(0, result.best_score, result.best->model_id());

  for (int epoch = 1; epoch <= config.epochs_per_round; ++epoch) {
    try {
      train_one_epoch(work, train, config, schedule);
    } catch (const DivergenceError& e) {
      result.aborted = true;
      result.abort_reason = e.what();
      break;
    }
    const SelectionOutcome outcome = selection_score(variant, work, validation);
    push_audit(epoch, outcome, candidate_id(epoch));
    // Strictly-greater keeps the earlier candidate on ties.
    if (outcome.value > result.best_score.value) {
      result.best_score = outcome;
      result.best_epoch = epoch;
      result.best = std::make_unique<ScorerModel>(work.clone());
      result.best->set_model_id(candidate_id(epoch));
    }
  }
  return result;
}

PseudoLabelResult pseudo_label(const ScorerModel& model,
                               std::span<const UnlabeledExample> part, int round) {
  PseudoLabelResult result;
  result.examples.reserve(part.size());
  for (const UnlabeledExample& ex : part) {
    try {
      auto [a, b] = arrange_texts(ex.document, ex.summary, ex.reference, ex.id, model);
      const double score = score_sequence(model, build_model_input(model, a, b));
      if (!std::isfinite(score)) {
        ++result.skipped;
        result.skipped_ids.push_back(ex.id);
        continue;
      }
      result.examples.push_back({ex, score, model.model_id(), round});
    } catch (const EncodingError&) {
      ++result.skipped;
      result.skipped_ids.push_back(ex.id);
    }
  }
  return result;
}

SemiSupervisedResult semi_supervised_train(const ScorerModel& m0, const DatasetSplit& split,
                                           const OptimizerConfig& config,
                                           const TrainerOptions& options, std::size_t k) {
  if (k > split.unlabeled_parts.size()) {
    throw DataError("requested " + std::to_string(k) + " rounds but only " +
                    std::to_string(split.unlabeled_parts.size()) + " unlabeled parts exist");
  }
  if (split.train.empty()) {
    throw DataError("split has no training examples");
  }
  if (split.validation.empty()) {
    throw DataError("split has no validation examples");
  }

  SemiSupervisedResult result;
  TrainRunState& state = result.state;
  state.seed = config.seed;
  state.m0_param_hash = m0.parameter_hash();

  std::vector<TrainItem> labeled_items = make_train_items(split.train, m0);
  std::vector<ValidationItem> validation_items = make_validation_items(split.validation, m0);

  // Part 1: the supervised selection round on the labeled training set.
  RoundResult round0 = supervised_round(m0, labeled_items, validation_items, config,
                                        options.selection, 0, state.audit);
  state.rounds.push_back({0, labeled_items.size(), labeled_items.size(), 0, 0,
                          round0.best_epoch, round0.best_score.value, round0.aborted,
                          state.m0_param_hash});
  state.round_best_scores.push_back(round0.best_score);
  state.global_best_round = 0;
  state.global_best_score = round0.best_score;

  result.round_best.push_back(std::make_unique<ScorerModel>(round0.best->clone()));
  std::unique_ptr<ScorerModel> previous_best = std::move(round0.best);
  std::unique_ptr<ScorerModel> global_best =
      std::make_unique<ScorerModel>(previous_best->clone());

  // Part 2: k semi-supervised rounds over the prepared unlabeled parts.
  std::vector<TrainItem> pseudo_items;
  std::size_t pool_size = labeled_items.size();
  for (std::size_t t = 1; t <= k; ++t) {
    const auto& part = split.unlabeled_parts[t - 1];
    PseudoLabelResult labels = pseudo_label(*previous_best, part, static_cast<int>(t));
    for (const PseudoLabeledExample& ex : labels.examples) {
      pseudo_items.push_back(make_train_item(ex, m0));
    }
    pool_size += labels.examples.size();

    if (options.resample_validation_per_round) {
      // Redraw the held-out sample from the whole labeled pool; the rest of
      // the pool becomes this round's labeled training share.
      std::vector<AnnotatedExample> labeled_pool = split.train;
      labeled_pool.insert(labeled_pool.end(), split.validation.begin(),
                          split.validation.end());
      auto [validation, reduced] =
          sample_validation(labeled_pool, split.validation.size(), mix_seed(split.seed, t));
      validation_items = make_validation_items(validation, m0);
      labeled_items = make_train_items(reduced, m0);
    }

    std::vector<TrainItem> training_set = labeled_items;
    if (!options.literal_round_training) {
      training_set.insert(training_set.end(), pseudo_items.begin(), pseudo_items.end());
    }

    // Every round restarts from the original initial parameters.
    RoundResult round = supervised_round(m0, training_set, validation_items, config,
                                         options.selection, static_cast<int>(t), state.audit);
    state.rounds.push_back({static_cast<int>(t), pool_size, training_set.size(),
                            labels.examples.size(), labels.skipped, round.best_epoch,
                            round.best_score.value, round.aborted, m0.parameter_hash()});
    state.round_best_scores.push_back(round.best_score);

    if (round.best_score.value > state.global_best_score.value) {
      state.global_best_score = round.best_score;
      state.global_best_round = static_cast<int>(t);
      global_best = std::make_unique<ScorerModel>(round.best->clone());
    }
    result.round_best.push_back(std::make_unique<ScorerModel>(round.best->clone()));
    previous_best = std::move(round.best);
  }

  result.best = std::move(global_best);
  return result;
}

void write_audit_log(const std::filesystem::path& path, const TrainRunState& state) {
  std::vector<Json> records;
  records.reserve(state.audit.size());
  for (const FEvaluation& e : state.audit) {
    Json record{{"round", e.round},
                {"epoch", e.epoch},
                {"f_variant", to_string(e.variant)},
                {"value", e.value},
                {"degenerate", e.degenerate},
                {"model_id", e.model_id}};
    if (!std::isnan(e.pearson)) record["pearson"] = e.pearson;
    if (!std::isnan(e.spearman)) record["spearman"] = e.spearman;
    records.push_back(std::move(record));
  }
  write_jsonl(path, records);
}

Json train_state_json(const TrainRunState& state) {
  Json rounds = Json::array();
  for (const RoundRecord& r : state.rounds) {
    rounds.push_back({{"round", r.round},
                      {"pool_size", r.pool_size},
                      {"training_set_size", r.training_set_size},
                      {"pseudo_added", r.pseudo_added},
                      {"pseudo_skipped", r.pseudo_skipped},
                      {"best_epoch", r.best_epoch},
                      {"best_f", r.best_f},
                      {"aborted", r.aborted},
                      {"restart_param_hash", r.restart_param_hash}});
  }
  return Json{{"seed", state.seed},
              {"m0_param_hash", state.m0_param_hash},
              {"global_best_round", state.global_best_round},
              {"global_best_f", state.global_best_score.value},
              {"rounds", std::move(rounds)}};
}

}  // namespace summscore
