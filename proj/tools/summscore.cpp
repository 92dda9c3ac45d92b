// Command-line surface binding the library into reproducible runs:
//   prepare-data  train  score  evaluate  ablate {volume,input-mode,diversity}
//   leaderboard
// Exit codes: 0 success, 1 usage, 2 data error, 3 training divergence.

#include <cstdlib>
#include <fcntl.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "summscore/corpus.hpp"
#include "summscore/harness.hpp"
#include "summscore/jsonl.hpp"
#include "summscore/random.hpp"
#include "summscore/regressor.hpp"
#include "summscore/trainer.hpp"

namespace fs = std::filesystem;
using namespace summscore;

namespace {

constexpr const char* kCacheEnvVar = "SUMMSCORE_MODEL_CACHE";

// ---------------------------------------------------------------------------
// Option plumbing: config file < CLI flag precedence, unknown keys rejected,
// effective config serialized with every run.

class OptionSet {
 public:
  template <typename T>
  void bind(CLI::Option* option, T* target, bool semantic = true) {
    Entry entry;
    entry.name = config_key(option);
    entry.option = option;
    entry.semantic = semantic;
    entry.apply = [target](const Json& value) { *target = value.get<T>(); };
    entry.dump = [target]() { return Json(*target); };
    entries_.push_back(std::move(entry));
  }

  // Values from the config file fill every option the command line left
  // untouched; unknown keys are errors.
  void apply_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      throw UsageError("cannot open config file: " + path);
    }
    Json config;
    try {
      config = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw UsageError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!config.is_object()) {
      throw UsageError("config file must hold a JSON object");
    }
    for (const auto& [key, value] : config.items()) {
      Entry* entry = find(key);
      if (entry == nullptr) {
        throw UsageError("unknown config key '" + key + "'");
      }
      if (entry->option->count() == 0) {
        entry->apply(value);
      }
    }
  }

  Json effective(const std::string& command) const {
    Json config{{"command", command}};
    for (const Entry& entry : entries_) {
      config[entry.name] = entry.dump();
    }
    return config;
  }

  // Output locations are excluded so reruns into fresh directories keep the
  // same fingerprint.
  std::string fingerprint(const std::string& command) const {
    Json config{{"command", command}};
    for (const Entry& entry : entries_) {
      if (entry.semantic) config[entry.name] = entry.dump();
    }
    return config_fingerprint(config);
  }

 private:
  struct Entry {
    std::string name;
    CLI::Option* option = nullptr;
    bool semantic = true;
    std::function<void(const Json&)> apply;
    std::function<Json()> dump;
  };

  static std::string config_key(const CLI::Option* option) {
    std::string name = option->get_name(false, true);
    if (name.rfind("--", 0) == 0) name = name.substr(2);
    return name;
  }

  Entry* find(const std::string& key) {
    for (Entry& entry : entries_) {
      if (entry.name == key) return &entry;
    }
    return nullptr;
  }

  std::vector<Entry> entries_;
};

// Every run writes into a fresh directory guarded by a lock file.
void claim_run_directory(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path lock = dir / ".lock";
  const int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw UsageError("run directory " + dir.string() +
                     " is already claimed (lock file exists); use a fresh directory");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

void write_effective_config(const fs::path& dir, const Json& config,
                            const std::string& fingerprint) {
  Json with_fp = config;
  with_fp["fingerprint"] = fingerprint;
  std::ofstream out(dir / "config.json");
  out << with_fp.dump(2) << '\n';
}

fs::path resolve_model_path(const std::string& path) {
  if (fs::exists(path)) return path;
  if (const char* cache = std::getenv(kCacheEnvVar)) {
    const fs::path candidate = fs::path(cache) / path;
    if (fs::exists(candidate)) return candidate;
  }
  return path;
}

std::vector<QualityDimension> parse_dimensions(const std::vector<std::string>& names) {
  std::vector<QualityDimension> dims;
  if (names.empty()) {
    dims.assign(kAllDimensions.begin(), kAllDimensions.end());
    return dims;
  }
  for (const std::string& name : names) {
    dims.push_back(dimension_from_string(name));
  }
  return dims;
}

// ---------------------------------------------------------------------------
// Shared flag bundles.

struct EncoderFlags {
  std::string kind = "tiny";
  std::string checkpoint;
  int dim = 16;
  int buckets = 256;
  int positions = 128;
  std::uint64_t seed = 7;
  int head_hidden = 0;
  std::uint64_t head_seed = 11;
  int max_length = 0;  // 0: use the encoder position limit

  void register_options(CLI::App* cmd, OptionSet& set) {
    set.bind(cmd->add_option("--encoder-kind", kind, "Initial encoder kind (tiny|checkpoint)"),
             &kind);
    set.bind(cmd->add_option("--encoder-checkpoint", checkpoint,
                             "Encoder checkpoint directory (encoder-kind=checkpoint)"),
             &checkpoint);
    set.bind(cmd->add_option("--encoder-dim", dim, "Tiny encoder embedding dim"), &dim);
    set.bind(cmd->add_option("--encoder-buckets", buckets, "Tiny encoder hash buckets"),
             &buckets);
    set.bind(cmd->add_option("--encoder-positions", positions, "Tiny encoder max positions"),
             &positions);
    set.bind(cmd->add_option("--encoder-seed", seed, "Tiny encoder init seed"), &seed);
    set.bind(cmd->add_option("--head-hidden", head_hidden,
                             "Regression head hidden units (0 = affine)"),
             &head_hidden);
    set.bind(cmd->add_option("--head-seed", head_seed, "Regression head init seed"), &head_seed);
    set.bind(cmd->add_option("--max-len", max_length, "Input layout budget (0 = encoder limit)"),
             &max_length);
  }

  ScorerModel make_model(QualityDimension dimension) const {
    std::unique_ptr<SequenceEncoder> encoder;
    if (kind == "tiny") {
      encoder = std::make_unique<TinyTestEncoder>(
          TinyEncoderConfig{buckets, dim, positions, seed});
    } else if (kind == "checkpoint") {
      if (checkpoint.empty()) {
        throw UsageError("--encoder-checkpoint is required with encoder-kind=checkpoint");
      }
      encoder = load_encoder(resolve_model_path(checkpoint));
    } else {
      throw UsageError("unknown encoder kind: " + kind);
    }
    RegressionHead head =
        RegressionHead::seeded(encoder->embedding_dim(), head_hidden, head_seed);
    ScorerModel model = ScorerModel::make(dimension, std::move(encoder), std::move(head));
    if (max_length > 0) {
      LayoutOptions layout = model.layout();
      layout.max_length = max_length;
      model.set_layout(layout);
    }
    model.set_model_id("m0-" + to_string(dimension));
    return model;
  }
};

struct OptimizerFlags {
  OptimizerConfig config;

  void register_options(CLI::App* cmd, OptionSet& set) {
    set.bind(cmd->add_option("--learning-rate", config.learning_rate, "Base learning rate"),
             &config.learning_rate);
    set.bind(cmd->add_option("--weight-decay", config.weight_decay, "Decoupled weight decay"),
             &config.weight_decay);
    set.bind(cmd->add_option("--batch-size", config.batch_size, "Mini-batch size"),
             &config.batch_size);
    set.bind(cmd->add_option("--epochs", config.epochs_per_round, "Fine-tuning epochs per round"),
             &config.epochs_per_round);
    set.bind(cmd->add_option("--warmup-fraction", config.warmup_fraction,
                             "Warmup share of a round's steps"),
             &config.warmup_fraction);
    set.bind(cmd->add_option("--seed", config.seed, "Training seed"), &config.seed);
    set.bind(cmd->add_flag("--freeze-encoder", config.freeze_encoder,
                           "Train the head only (diagnostics)"),
             &config.freeze_encoder);
  }
};

struct TrainerFlags {
  std::string selection = "max_product";
  TrainerOptions options;

  void register_options(CLI::App* cmd, OptionSet& set) {
    set.bind(cmd->add_option("--selection", selection,
                             "Model selection function (max_pearson|max_spearman|max_product)"),
             &selection);
    set.bind(cmd->add_flag("--resample-validation", options.resample_validation_per_round,
                           "Redraw the validation sample each round"),
             &options.resample_validation_per_round);
    set.bind(cmd->add_flag("--literal-round-training", options.literal_round_training,
                           "Rounds train on the labeled set only"),
             &options.literal_round_training);
  }

  TrainerOptions resolved() const {
    TrainerOptions out = options;
    out.selection = selection_from_string(selection);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Prepared-data directory access.

struct PreparedData {
  DatasetSplit split;
  Json manifest;
};

PreparedData load_prepared(const fs::path& dir) {
  PreparedData data;
  const auto manifests = read_jsonl(dir / "manifest.json");
  if (manifests.size() != 1) {
    throw DataError("manifest.json must hold exactly one record");
  }
  data.manifest = manifests.front();
  data.split.seed = data.manifest.at("seed").get<std::uint64_t>();
  data.split.train = load_annotated(dir / "train.jsonl");
  data.split.validation = load_annotated(dir / "validation.jsonl");
  data.split.test = load_annotated(dir / "test.jsonl");
  const std::size_t parts = data.manifest.at("sizes").at("unlabeled_parts").get<std::size_t>();
  for (std::size_t p = 0; p < parts; ++p) {
    char name[48];
    std::snprintf(name, sizeof(name), "unlabeled_part_%03zu.jsonl", p);
    data.split.unlabeled_parts.push_back(load_unlabeled(dir / name));
  }
  return data;
}

// Train run directory: best checkpoint per dimension listed in manifest.json.
std::vector<ScorerModel> load_models_dir(const fs::path& dir,
                                         const std::vector<QualityDimension>& wanted) {
  const auto manifests = read_jsonl(dir / "manifest.json");
  if (manifests.size() != 1) {
    throw DataError("model manifest must hold exactly one record");
  }
  const Json& manifest = manifests.front();
  std::vector<ScorerModel> models;
  for (QualityDimension d : wanted) {
    const std::string name = to_string(d);
    if (!manifest.at("dimensions").contains(name)) continue;
    const std::string rel =
        manifest.at("dimensions").at(name).at("best_checkpoint").get<std::string>();
    models.push_back(load_checkpoint(dir / rel));
  }
  if (models.empty()) {
    throw DataError("no trained models for the requested dimensions in " + dir.string());
  }
  return models;
}

void persist_train_run(const fs::path& dim_dir, const SemiSupervisedResult& run) {
  fs::create_directories(dim_dir);
  write_audit_log(dim_dir / "audit.jsonl", run.state);
  std::ofstream state(dim_dir / "state.json");
  state << train_state_json(run.state).dump(2) << '\n';
  for (std::size_t round = 0; round < run.round_best.size(); ++round) {
    char name[32];
    std::snprintf(name, sizeof(name), "round_%03zu", round);
    save_checkpoint(*run.round_best[round], dim_dir / name,
                    {{"round", std::to_string(round)},
                     {"f_value", std::to_string(run.state.round_best_scores[round].value)}});
  }
  save_checkpoint(*run.best, dim_dir / "best",
                  {{"round", std::to_string(run.state.global_best_round)},
                   {"f_value", std::to_string(run.state.global_best_score.value)}});
}

std::size_t count_degenerate(const TrainRunState& state) {
  std::size_t n = 0;
  for (const FEvaluation& e : state.audit) n += e.degenerate ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------------------
// Command implementations.

struct PrepareCmd {
  std::string input;
  std::string input_format = "records";
  std::string unlabeled;
  std::string out;
  std::string config_file;
  std::size_t train_n = 1000;
  std::size_t test_n = 600;
  std::size_t val_n = 100;
  std::size_t parts = 5;
  std::uint64_t seed = 13;
  OptionSet options;

  void register_cmd(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("prepare-data",
                                       "Aggregate, split and partition a dataset");
    options.bind(cmd->add_option("--input", input, "Annotated dataset file")->required(),
                 &input);
    options.bind(cmd->add_option("--input-format", input_format,
                                 "Input layout (records|summeval)"),
                 &input_format);
    options.bind(cmd->add_option("--unlabeled", unlabeled, "Unlabeled dataset file"),
                 &unlabeled);
    options.bind(cmd->add_option("--train-n", train_n, "Training set size"), &train_n);
    options.bind(cmd->add_option("--test-n", test_n, "Test set size"), &test_n);
    options.bind(cmd->add_option("--val-n", val_n, "Validation sample size"), &val_n);
    options.bind(cmd->add_option("--parts", parts, "Unlabeled partition count"), &parts);
    options.bind(cmd->add_option("--seed", seed, "Split seed"), &seed);
    options.bind(cmd->add_option("--out", out, "Output directory")->required(), &out,
                 /*semantic=*/false);
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!config_file.empty()) options.apply_config_file(config_file);
    const std::string fingerprint = options.fingerprint("prepare-data");

    std::vector<AnnotatedExample> annotated;
    if (input_format == "records") {
      annotated = load_annotated(input);
    } else if (input_format == "summeval") {
      annotated = load_summeval(input);
    } else {
      throw UsageError("unknown input format: " + input_format);
    }
    for (AnnotatedExample& ex : annotated) {
      ex = aggregate_expert_scores(std::move(ex));
    }

    DatasetSplit split;
    split.seed = seed;
    auto [train_full, test] = split_annotated(annotated, train_n, test_n, seed);
    split.test = std::move(test);
    auto [validation, train] = sample_validation(train_full, val_n, seed);
    split.train = std::move(train);
    split.validation = std::move(validation);
    if (!unlabeled.empty()) {
      const auto pool = load_unlabeled(unlabeled);
      if (parts > 0) {
        split.unlabeled_parts = partition_unlabeled(pool, parts, seed);
      }
    }

    claim_run_directory(out);
    const fs::path dir(out);
    save_annotated(dir / "train.jsonl", split.train);
    save_annotated(dir / "validation.jsonl", split.validation);
    save_annotated(dir / "test.jsonl", split.test);
    for (std::size_t p = 0; p < split.unlabeled_parts.size(); ++p) {
      char name[48];
      std::snprintf(name, sizeof(name), "unlabeled_part_%03zu.jsonl", p);
      save_unlabeled(dir / name, split.unlabeled_parts[p]);
    }
    write_split_manifest(dir / "manifest.json", split, fingerprint);
    write_effective_config(dir, options.effective("prepare-data"), fingerprint);
    std::cout << "prepared " << split.train.size() << "/" << split.validation.size() << "/"
              << split.test.size() << " train/validation/test with "
              << split.unlabeled_parts.size() << " unlabeled parts\n";
  }
};

struct TrainCmd {
  std::string data_dir;
  std::string out;
  std::string config_file;
  std::vector<std::string> dimension_names;
  long rounds = -1;  // -1: all prepared parts
  EncoderFlags encoder;
  OptimizerFlags optimizer;
  TrainerFlags trainer;
  OptionSet options;

  void register_cmd(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("train", "Semi-supervised training per dimension");
    options.bind(cmd->add_option("--data-dir", data_dir, "Prepared data directory")->required(),
                 &data_dir);
    options.bind(cmd->add_option("--out", out, "Run directory")->required(), &out,
                 /*semantic=*/false);
    options.bind(cmd->add_option("--dimensions", dimension_names,
                                 "Quality dimensions (default: all four)")
                     ->delimiter(','),
                 &dimension_names);
    options.bind(cmd->add_option("--rounds", rounds,
                                 "Semi-supervised rounds (-1: all prepared parts)"),
                 &rounds);
    encoder.register_options(cmd, options);
    optimizer.register_options(cmd, options);
    trainer.register_options(cmd, options);
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!config_file.empty()) options.apply_config_file(config_file);
    const std::string fingerprint = options.fingerprint("train");

    const PreparedData data = load_prepared(data_dir);
    const std::vector<QualityDimension> dims = parse_dimensions(dimension_names);
    const std::size_t k = rounds < 0 ? data.split.unlabeled_parts.size()
                                     : static_cast<std::size_t>(rounds);

    claim_run_directory(out);
    const fs::path dir(out);
    write_effective_config(dir, options.effective("train"), fingerprint);

    Json manifest{{"fingerprint", fingerprint}, {"dimensions", Json::object()}};
    std::size_t degenerate_total = 0;
    for (QualityDimension d : dims) {
      const ScorerModel m0 = encoder.make_model(d);
      SemiSupervisedResult run =
          semi_supervised_train(m0, data.split, optimizer.config, trainer.resolved(), k);
      const std::string name = to_string(d);
      persist_train_run(dir / name, run);
      degenerate_total += count_degenerate(run.state);
      manifest["dimensions"][name] = {
          {"best_checkpoint", name + "/best"},
          {"best_round", run.state.global_best_round},
          {"best_f", run.state.global_best_score.value},
          {"rounds", run.state.rounds.size() - 1},
      };
      std::cout << name << ": best f=" << run.state.global_best_score.value << " (round "
                << run.state.global_best_round << ")\n";
    }
    if (degenerate_total > 0) {
      std::cerr << "warning: " << degenerate_total
                << " degenerate selection evaluations (sentinel -1 recorded)\n";
    }
    write_jsonl(dir / "manifest.json", {manifest});
  }
};

struct ScoreCmd {
  std::string data;
  std::string models_dir;
  std::string out;
  std::string config_file;
  std::vector<std::string> dimension_names;
  bool lexical = false;
  bool no_clamp = false;
  OptionSet options;

  void register_cmd(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("score", "Score a dataset file with trained models");
    options.bind(cmd->add_option("--data", data, "Dataset file to score")->required(), &data);
    options.bind(cmd->add_option("--models", models_dir, "Train run directory"), &models_dir);
    options.bind(cmd->add_option("--dimensions", dimension_names,
                                 "Dimensions to score (default: all trained)")
                     ->delimiter(','),
                 &dimension_names);
    options.bind(cmd->add_flag("--lexical", lexical, "Add the lexical metric battery"),
                 &lexical);
    options.bind(cmd->add_flag("--no-clamp", no_clamp, "Report raw unclamped scores"),
                 &no_clamp);
    options.bind(cmd->add_option("--out", out, "Output scores file")->required(), &out,
                 /*semantic=*/false);
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!config_file.empty()) options.apply_config_file(config_file);
    const auto records = load_unlabeled(data);
    if (records.empty()) {
      std::cerr << "warning: input file has no records; writing an empty score file\n";
      write_score_file(out, {});
      return;
    }

    std::vector<ScorerModel> models;
    if (!models_dir.empty()) {
      models = load_models_dir(resolve_model_path(models_dir),
                               parse_dimensions(dimension_names));
    }
    const ScoreOptions score_options{!no_clamp};

    std::vector<RawScore> scores;
    for (const ScorerModel& model : models) {
      for (const UnlabeledExample& ex : records) {
        const std::string& first = model.pairing() == PairingKind::kSummaryReference
                                       ? ex.reference
                                       : ex.document;
        scores.push_back({ex.id, to_string(model.dimension()),
                          predict(model, first, ex.summary, score_options), {}});
      }
    }
    if (lexical) {
      TfIdfStats stats;
      for (const UnlabeledExample& ex : records) stats.add_document(ex.document);
      for (const UnlabeledExample& ex : records) {
        const std::string& comparison = ex.reference.empty() ? ex.document : ex.reference;
        for (const auto& [metric, value] : lexical_scores(ex.summary, comparison, stats)) {
          scores.push_back({ex.id, metric, value, {}});
        }
      }
    }
    write_score_file(out, scores);
    std::cout << "wrote " << scores.size() << " scores for " << records.size()
              << " records\n";
  }
};

struct EvaluateCmd {
  std::string data;
  std::string models_dir;
  std::string out;
  std::string config_file;
  std::vector<std::string> dimension_names;
  std::vector<std::string> external_files;
  bool no_lexical = false;
  bool no_clamp = false;
  bool system_level = false;
  OptionSet options;

  void register_cmd(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("evaluate",
                                       "Correlate metric columns against human scores");
    options.bind(cmd->add_option("--data", data, "Annotated test set")->required(), &data);
    options.bind(cmd->add_option("--models", models_dir, "Train run directory"), &models_dir);
    options.bind(cmd->add_option("--dimensions", dimension_names,
                                 "Model dimensions to include")
                     ->delimiter(','),
                 &dimension_names);
    options.bind(cmd->add_option("--external", external_files,
                                 "External score files (id/metric/score records)"),
                 &external_files);
    options.bind(cmd->add_flag("--no-lexical", no_lexical, "Skip the lexical baselines"),
                 &no_lexical);
    options.bind(cmd->add_flag("--no-clamp", no_clamp, "Use raw unclamped model scores"),
                 &no_clamp);
    options.bind(cmd->add_flag("--system-level", system_level,
                               "Correlate per-system means instead of per-summary scores"),
                 &system_level);
    options.bind(cmd->add_option("--out", out, "Output directory")->required(), &out,
                 /*semantic=*/false);
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!config_file.empty()) options.apply_config_file(config_file);
    const std::string fingerprint = options.fingerprint("evaluate");

    std::vector<AnnotatedExample> test_set = load_annotated(data);
    for (AnnotatedExample& ex : test_set) {
      ex = aggregate_expert_scores(std::move(ex));
    }

    std::vector<ScorerModel> models;
    if (!models_dir.empty()) {
      models = load_models_dir(resolve_model_path(models_dir),
                               parse_dimensions(dimension_names));
    }
    std::vector<const ScorerModel*> model_ptrs;
    for (const ScorerModel& m : models) model_ptrs.push_back(&m);

    ScoreColumns external;
    for (const std::string& file : external_files) {
      for (auto& [metric, column] : load_score_file(file)) {
        external[metric] = std::move(column);
      }
    }

    ExperimentOptions experiment;
    experiment.include_lexical = !no_lexical;
    experiment.clamp_scores = !no_clamp;
    experiment.system_level = system_level;

    CorrelationExperimentResult result =
        run_correlation_experiment(model_ptrs, test_set, external, experiment);

    claim_run_directory(out);
    const fs::path dir(out);
    write_score_file(dir / "raw_scores.jsonl", result.raw);
    write_table_csv(dir / "correlation.csv", result.table);
    write_table_jsonl(dir / "correlation.jsonl", result.table);
    write_effective_config(dir, options.effective("evaluate"), fingerprint);
    std::cout << "correlation table: " << result.table.metrics.size() << " metrics x "
              << result.table.dimensions.size() << " dimensions over "
              << test_set.size() << " examples\n";
  }
};

struct AblateVolumeCmd {
  std::string data_dir;
  std::string out;
  std::string config_file;
  std::string dimension = "fluency";
  std::vector<std::size_t> volumes;
  EncoderFlags encoder;
  OptimizerFlags optimizer;
  TrainerFlags trainer;
  OptionSet options;

  void register_cmd(CLI::App* ablate) {
    CLI::App* cmd = ablate->add_subcommand("volume", "Pseudo-data volume sweep");
    options.bind(cmd->add_option("--data-dir", data_dir, "Prepared data directory")->required(),
                 &data_dir);
    options.bind(cmd->add_option("--dimension", dimension, "Quality dimension"), &dimension);
    options.bind(cmd->add_option("--volumes", volumes, "Pseudo-data volumes (increasing)")
                     ->required()
                     ->delimiter(','),
                 &volumes);
    encoder.register_options(cmd, options);
    optimizer.register_options(cmd, options);
    trainer.register_options(cmd, options);
    options.bind(cmd->add_option("--out", out, "Output directory")->required(), &out,
                 /*semantic=*/false);
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!config_file.empty()) options.apply_config_file(config_file);
    const std::string fingerprint = options.fingerprint("ablate-volume");

    const PreparedData data = load_prepared(data_dir);
    const ScorerModel m0 = encoder.make_model(dimension_from_string(dimension));
    const AblationSeries series =
        run_volume_sweep(m0, data.split, optimizer.config, trainer.resolved(), volumes);

    claim_run_directory(out);
    const fs::path dir(out);
    std::ofstream csv(dir / "series.csv");
    csv << "volume,pearson,spearman,rounds\n";
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      csv << series.x[i] << ',' << format_fixed(series.pearson[i], 6) << ','
          << format_fixed(series.spearman[i], 6) << ',' << series.rounds_used[i] << '\n';
    }
    write_effective_config(dir, options.effective("ablate-volume"), fingerprint);
    std::cout << "volume sweep over " << series.x.size() << " points\n";
  }
};

struct AblateInputModeCmd {
  std::string data_dir;
  std::string out;
  std::string config_file;
  std::string dimension;
  long rounds = -1;
  EncoderFlags encoder;
  OptimizerFlags optimizer;
  TrainerFlags trainer;
  OptionSet options;

  void register_cmd(CLI::App* ablate) {
    CLI::App* cmd = ablate->add_subcommand(
        "input-mode", "Document/summary vs summary/reference pairing ablation");
    options.bind(cmd->add_option("--data-dir", data_dir, "Prepared data directory")->required(),
                 &data_dir);
    options.bind(cmd->add_option("--dimension", dimension,
                                 "Paired dimension (consistency|relevance)")
                     ->required(),
                 &dimension);
    options.bind(cmd->add_option("--rounds", rounds,
                                 "Semi-supervised rounds (-1: all prepared parts)"),
                 &rounds);
    encoder.register_options(cmd, options);
    optimizer.register_options(cmd, options);
    trainer.register_options(cmd, options);
    options.bind(cmd->add_option("--out", out, "Output directory")->required(), &out,
                 /*semantic=*/false);
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!config_file.empty()) options.apply_config_file(config_file);
    const std::string fingerprint = options.fingerprint("ablate-input-mode");

    const PreparedData data = load_prepared(data_dir);
    const QualityDimension d = dimension_from_string(dimension);
    if (input_mode_for(d) != InputMode::kPaired) {
      throw UsageError("the input-mode ablation applies to consistency or relevance");
    }
    const std::size_t k = rounds < 0 ? data.split.unlabeled_parts.size()
                                     : static_cast<std::size_t>(rounds);
    const ScorerModel m0 = encoder.make_model(d);
    InputModeAblationResult result =
        run_input_mode_ablation(m0, data.split, optimizer.config, trainer.resolved(), k);

    claim_run_directory(out);
    const fs::path dir(out);
    const auto persist_arm = [&](const AblationArm& arm) {
      const fs::path arm_dir = dir / to_string(arm.pairing);
      fs::create_directories(arm_dir);
      write_audit_log(arm_dir / "audit.jsonl", arm.state);
      std::ofstream state(arm_dir / "state.json");
      state << train_state_json(arm.state).dump(2) << '\n';
      std::ofstream config(arm_dir / "config.json");
      Json with_fp = arm.config;
      with_fp["fingerprint"] = config_fingerprint(arm.config);
      config << with_fp.dump(2) << '\n';
      save_checkpoint(*arm.best, arm_dir / "best");
    };
    persist_arm(result.document_summary);
    persist_arm(result.summary_reference);

    std::ofstream csv(dir / "summary.csv");
    csv << "pairing,pearson,spearman\n";
    const auto row = [&](const AblationArm& arm) {
      csv << to_string(arm.pairing) << ',' << format_fixed(arm.test_correlation.pearson, 4)
          << ',' << format_fixed(arm.test_correlation.spearman, 4) << '\n';
    };
    row(result.document_summary);
    row(result.summary_reference);
    write_effective_config(dir, options.effective("ablate-input-mode"), fingerprint);
    std::cout << "input-mode ablation for " << dimension << " complete\n";
  }
};

struct AblateDiversityCmd {
  std::string data;
  std::vector<std::string> checkpoints;
  std::string out;
  std::string config_file;
  double rouge_threshold = 0.3;
  double human_threshold = 4.0;
  bool no_clamp = false;
  OptionSet options;

  void register_cmd(CLI::App* ablate) {
    CLI::App* cmd = ablate->add_subcommand(
        "diversity", "Export (human, model) score pairs for low-overlap summaries");
    options.bind(cmd->add_option("--data", data, "Annotated dataset with references")
                     ->required(),
                 &data);
    options.bind(cmd->add_option("--checkpoint", checkpoints,
                                 "Model checkpoint directories (tagged by pairing)")
                     ->required(),
                 &checkpoints);
    options.bind(cmd->add_option("--rouge-threshold", rouge_threshold,
                                 "Keep examples with ROUGE-1 f1 below this"),
                 &rouge_threshold);
    options.bind(cmd->add_option("--human-threshold", human_threshold,
                                 "Keep examples with human score above this"),
                 &human_threshold);
    options.bind(cmd->add_flag("--no-clamp", no_clamp, "Use raw unclamped model scores"),
                 &no_clamp);
    options.bind(cmd->add_option("--out", out, "Output directory")->required(), &out,
                 /*semantic=*/false);
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!config_file.empty()) options.apply_config_file(config_file);
    const std::string fingerprint = options.fingerprint("ablate-diversity");

    std::vector<AnnotatedExample> examples = load_annotated(data);
    for (AnnotatedExample& ex : examples) {
      ex = aggregate_expert_scores(std::move(ex));
    }
    std::vector<ScorerModel> models;
    std::vector<std::pair<std::string, const ScorerModel*>> tagged;
    models.reserve(checkpoints.size());
    for (const std::string& path : checkpoints) {
      models.push_back(load_checkpoint(resolve_model_path(path)));
    }
    for (const ScorerModel& m : models) {
      tagged.emplace_back(to_string(m.pairing()), &m);
    }

    ExperimentOptions experiment;
    experiment.clamp_scores = !no_clamp;
    const DiversityExport exported =
        export_diversity_scatter(tagged, examples, rouge_threshold, human_threshold,
                                 experiment);
    if (exported.empty_warning) {
      std::cerr << "warning: no examples pass the diversity thresholds\n";
    }

    claim_run_directory(out);
    write_diversity_export(fs::path(out) / "scatter.jsonl", exported);
    write_effective_config(out, options.effective("ablate-diversity"), fingerprint);
    std::cout << "diversity export: " << exported.selected << " of " << exported.candidates
              << " examples selected\n";
  }
};

struct LeaderboardCmd {
  std::string data;
  std::string models_dir;
  std::string out;
  std::string config_file;
  std::vector<std::string> external_files;
  bool no_clamp = false;
  OptionSet options;

  void register_cmd(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("leaderboard",
                                       "Per-system mean quality scores plus ROUGE");
    options.bind(cmd->add_option("--data", data,
                                 "System outputs (records with system and reference fields)")
                     ->required(),
                 &data);
    options.bind(cmd->add_option("--models", models_dir, "Train run directory"), &models_dir);
    options.bind(cmd->add_option("--external", external_files, "External score files"),
                 &external_files);
    options.bind(cmd->add_flag("--no-clamp", no_clamp, "Use raw unclamped model scores"),
                 &no_clamp);
    options.bind(cmd->add_option("--out", out, "Output directory")->required(), &out,
                 /*semantic=*/false);
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->callback([this] { run(); });
  }

  void run() {
    if (!config_file.empty()) options.apply_config_file(config_file);
    const std::string fingerprint = options.fingerprint("leaderboard");

    const auto entries = load_unlabeled(data);
    std::vector<ScorerModel> models;
    if (!models_dir.empty()) {
      models = load_models_dir(resolve_model_path(models_dir), parse_dimensions({}));
    }
    std::vector<const ScorerModel*> model_ptrs;
    for (const ScorerModel& m : models) model_ptrs.push_back(&m);

    ScoreColumns external;
    for (const std::string& file : external_files) {
      for (auto& [metric, column] : load_score_file(file)) {
        external[metric] = std::move(column);
      }
    }

    ExperimentOptions experiment;
    experiment.clamp_scores = !no_clamp;
    const LeaderboardResult result =
        build_leaderboard(entries, model_ptrs, external, experiment);

    claim_run_directory(out);
    const fs::path dir(out);
    write_leaderboard_csv(dir / "leaderboard.csv", result);
    write_score_file(dir / "raw_scores.jsonl", result.raw);
    write_effective_config(dir, options.effective("leaderboard"), fingerprint);
    std::cout << "leaderboard over " << result.rows.size() << " systems\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SummScore: fine-grained summary quality scoring and evaluation"};
  app.require_subcommand(1);

  PrepareCmd prepare;
  TrainCmd train;
  ScoreCmd score;
  EvaluateCmd evaluate;
  LeaderboardCmd leaderboard;
  AblateVolumeCmd ablate_volume;
  AblateInputModeCmd ablate_input_mode;
  AblateDiversityCmd ablate_diversity;

  prepare.register_cmd(app);
  train.register_cmd(app);
  score.register_cmd(app);
  evaluate.register_cmd(app);
  CLI::App* ablate = app.add_subcommand("ablate", "Ablation experiments");
  ablate->require_subcommand(1);
  ablate_volume.register_cmd(ablate);
  ablate_input_mode.register_cmd(ablate);
  ablate_diversity.register_cmd(ablate);
  leaderboard.register_cmd(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "error: training diverged: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
