#include "tabdiff/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "json.hpp"

#include "tabdiff/errors.hpp"
#include "tabdiff/io_util.hpp"
#include "tabdiff/metrics.hpp"

namespace tabdiff {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kSplitStream = 0x73706c69ULL;
constexpr std::uint64_t kDwpredStream = 0x647770ULL;
constexpr std::uint64_t kMirSubsampleStream = 0x6d6972ULL;

const char* kClassifierNote =
    "classifier suite: logistic_regression, knn, decision_tree, mlp "
    "(reduced from the seven-model reference suite)";

struct Agg {
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t n = 0;
};

Agg aggregate(const std::vector<double>& values) {
  Agg a;
  a.n = values.size();
  if (values.empty()) return a;
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(a.n);
  if (a.n > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - a.mean) * (v - a.mean);
    a.std_dev = std::sqrt(sq / static_cast<double>(a.n - 1));
  }
  return a;
}

json agg_to_json(const Agg& a, const std::vector<double>& values) {
  json j;
  j["mean"] = a.mean;
  j["std"] = a.std_dev;
  j["seeds"] = a.n;
  j["values"] = values;
  return j;
}

json agg_to_json(const std::vector<double>& values) {
  return agg_to_json(aggregate(values), values);
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::vector<std::size_t> shuffled_prefix(std::size_t n, std::size_t k, Rng rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_int(i + 1);
    std::swap(order[i], order[j]);
  }
  order.resize(k);
  return order;
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void apply_threads(const RunConfig& config) { set_max_threads(config.threads); }

json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::uint64_t split_seed(std::uint64_t train_seed) {
  return Rng::mix(train_seed, kSplitStream);
}

std::string run_config_to_json_string(const RunConfig& config) {
  json j;
  j["data"] = config.data;
  j["schema"] = config.schema;
  j["out_dir"] = config.out_dir;
  j["train"] = train_config_to_json(config.train);
  j["gen_seeds"] = config.gen_seeds;
  j["eval_seeds"] = config.eval_seeds;
  j["mir_threshold"] = optional_to_json(config.mir_threshold);
  j["mmd_bandwidth"] = optional_to_json(config.mmd_bandwidth);
  j["fractions"] = config.fractions;
  j["threads"] = config.threads;
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig config;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "data") config.data = value.get<std::string>();
      else if (key == "schema") config.schema = value.get<std::string>();
      else if (key == "out_dir") config.out_dir = value.get<std::string>();
      else if (key == "train") config.train = train_config_from_json(value);
      else if (key == "gen_seeds") config.gen_seeds = value.get<std::size_t>();
      else if (key == "eval_seeds") config.eval_seeds = value.get<std::size_t>();
      else if (key == "mir_threshold" && !value.is_null()) config.mir_threshold = value.get<double>();
      else if (key == "mmd_bandwidth" && !value.is_null()) config.mmd_bandwidth = value.get<double>();
      else if (key == "fractions") config.fractions = value.get<std::vector<double>>();
      else if (key == "threads") config.threads = value.get<int>();
      else if (key == "mir_threshold" || key == "mmd_bandwidth") continue;
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json_string(read_file_to_string(path));
}

// ---------------------------------------------------------------------
// train
// ---------------------------------------------------------------------

void cmd_train(const RunConfig& config) {
  apply_threads(config);
  const TableSchema schema = load_schema(config.schema);
  const RawTable table = load_csv(config.data, schema);
  const SplitResult parts = split(table, {}, split_seed(config.train.seed));
  auto [encoded, fitted] = fit_transform(parts.train, schema);

  const TrainResult trained = train(encoded, fitted, config.train);

  std::string loss_csv = "epoch,loss\n";
  for (std::size_t e = 0; e < trained.loss_trace.size(); ++e) {
    loss_csv += std::to_string(e + 1) + "," + format_double(trained.loss_trace[e]) + "\n";
  }

  ensure_out_dir(config.out_dir);
  write_file_atomic(join_path(config.out_dir, "model.json"),
                    model_to_json_string(trained.model));
  write_file_atomic(join_path(config.out_dir, "loss.csv"), loss_csv);
}

// ---------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------

void cmd_sample(const std::string& model_path, std::size_t n, bool balanced,
                std::uint64_t seed, const std::string& out_path) {
  const GenerativeModel model = load_model(model_path);
  const RawTable synth = generate(model, n, balanced, seed);
  write_file_atomic(out_path, table_to_csv_string(synth, model.schema));
}

// ---------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------

void cmd_evaluate(const RunConfig& config, const std::string& synth_path) {
  apply_threads(config);
  if (config.eval_seeds < 1) throw ConfigError("eval_seeds must be >= 1");
  const TableSchema schema = load_schema(config.schema);
  const RawTable real = load_csv(config.data, schema);
  const RawTable synth = load_csv(synth_path, schema);
  if (synth.n_rows() == 0) throw ConfigError("synthetic table is empty");

  auto [real_enc, fitted] = fit_transform(real, schema);
  const EncodedMatrix synth_enc = transform(synth, fitted);
  const auto layout = make_layout(fitted);
  const std::uint64_t base = config.train.seed;

  json metrics;
  json provenance;
  provenance["real_rows"] = real.n_rows();
  provenance["synth_rows"] = synth.n_rows();

  metrics["dimwise_probability_rmse"] =
      agg_to_json({dimwise_probability_rmse(real_enc, synth_enc)});

  // Seed-dependent metric: holdout split and tie-breaking vary per seed.
  std::vector<double> dwpred_values;
  json skipped = json::array();
  DimwisePredictionResult first_run;
  for (std::size_t e = 0; e < config.eval_seeds; ++e) {
    const auto run = dimwise_prediction_rmse(real_enc, synth_enc, layout,
                                             Rng::mix(Rng::mix(base, kDwpredStream), e));
    dwpred_values.push_back(run.rmse);
    if (e == 0) {
      first_run = run;
      for (std::size_t d : run.skipped_dims) skipped.push_back(d);
    }
  }
  metrics["dimwise_prediction_rmse"] = agg_to_json(dwpred_values);
  provenance["dwpred_skipped_dims"] = skipped;
  provenance["dwpred_holdout"] = "shuffled half of the real rows per seed";

  const MmdResult mmd = mmd_rbf(real_enc.values, synth_enc.values, config.mmd_bandwidth);
  metrics["mmd_rbf"] = agg_to_json({mmd.value});
  provenance["mmd_sigma"] = mmd.sigma;
  provenance["mmd_degenerate"] = mmd.degenerate;

  metrics["dcr"] = agg_to_json({dcr(real_enc.values, synth_enc.values)});

  // Membership attack: members from the training portion of the canonical
  // split, non-members from the held-out test portion, sizes matched.
  const SplitResult parts = split(real, {}, split_seed(base));
  EncodedMatrix members_enc = transform(parts.train, fitted);
  EncodedMatrix non_members_enc = transform(parts.test, fitted);
  const std::size_t k =
      std::min(members_enc.values.rows(), non_members_enc.values.rows());
  const Matrix members = take_rows(
      members_enc.values,
      shuffled_prefix(members_enc.values.rows(), k, Rng(Rng::mix(base, kMirSubsampleStream))));
  const Matrix non_members = take_rows(
      non_members_enc.values,
      shuffled_prefix(non_members_enc.values.rows(), k,
                      Rng(Rng::mix(base, kMirSubsampleStream + 1))));
  const MirResult mir_result = mir(members, non_members, synth_enc.values, config.mir_threshold);
  metrics["mir"] = agg_to_json({mir_result.f1});
  provenance["mir_threshold"] = mir_result.threshold;
  provenance["mir_threshold_rule"] =
      config.mir_threshold ? "explicit" : "pooled median nearest-synthetic distance";
  provenance["mir_members"] = members.rows();
  provenance["mir_non_members"] = non_members.rows();
  provenance["mir_degenerate"] = mir_result.degenerate;
  provenance["split_seed"] = split_seed(base);

  json report;
  report["report"] = "evaluate";
  report["config"] = json::parse(run_config_to_json_string(config));
  report["metrics"] = metrics;
  report["provenance"] = provenance;

  // Paired per-dimension vectors behind the probability/prediction scatter
  // plots, for external plotting.
  const auto real_stats = dim_stats(real_enc);
  const auto synth_stats = dim_stats(synth_enc);
  std::string prob_csv = "dim,real,synth\n";
  for (std::size_t d = 0; d < real_stats.size(); ++d) {
    prob_csv += std::to_string(d) + "," + format_double(real_stats[d]) + "," +
                format_double(synth_stats[d]) + "\n";
  }
  std::string pred_csv = "dim,real_f1,synth_f1\n";
  for (std::size_t i = 0; i < first_run.dims.size(); ++i) {
    pred_csv += std::to_string(first_run.dims[i]) + "," + format_double(first_run.real_f1[i]) +
                "," + format_double(first_run.synth_f1[i]) + "\n";
  }

  ensure_out_dir(config.out_dir);
  write_file_atomic(join_path(config.out_dir, "eval_report.json"), report.dump(2) + "\n");
  write_file_atomic(join_path(config.out_dir, "dimwise_probability.csv"), prob_csv);
  write_file_atomic(join_path(config.out_dir, "dimwise_prediction.csv"), pred_csv);
}

// ---------------------------------------------------------------------
// utility / augment
// ---------------------------------------------------------------------

namespace {

struct ExperimentInputs {
  GenerativeModel model;
  EncodedMatrix train_enc;
  EncodedMatrix test_enc;
};

ExperimentInputs load_experiment_inputs(const RunConfig& config, const std::string& model_path) {
  if (config.gen_seeds < 1 || config.eval_seeds < 1) {
    throw ConfigError("gen_seeds and eval_seeds must be >= 1");
  }
  ExperimentInputs in;
  in.model = load_model(model_path);
  if (!in.model.conditional()) {
    throw ConfigError("this experiment requires a model trained with a target column");
  }
  const RawTable table = load_csv(config.data, in.model.schema);
  const SplitResult parts = split(table, {}, split_seed(in.model.config.seed));
  in.train_enc = transform(parts.train, in.model.schema);
  in.test_enc = transform(parts.test, in.model.schema);
  return in;
}

const std::array<const char*, 4> kScoreNames = {"accuracy", "f1", "auroc", "auprc"};

std::array<std::optional<double>, 4> score_values(const Scores& s) {
  return {s.accuracy, s.f1, s.auroc, s.auprc};
}

json utility_report_body(const UtilityResult& result) {
  json per_classifier;
  std::vector<double> overall_gap_per_metric[4];
  for (ClassifierKind kind : kAllClassifierKinds) {
    std::vector<double> real_vals[4], synth_vals[4], gap_vals[4];
    for (const auto& cell : result.cells) {
      if (cell.kind != kind) continue;
      const auto rv = score_values(cell.real);
      const auto sv = score_values(cell.synth);
      for (std::size_t m = 0; m < 4; ++m) {
        if (rv[m]) real_vals[m].push_back(*rv[m]);
        if (sv[m]) synth_vals[m].push_back(*sv[m]);
        if (rv[m] && sv[m]) gap_vals[m].push_back(std::abs(*rv[m] - *sv[m]));
      }
    }
    json entry;
    for (std::size_t m = 0; m < 4; ++m) {
      entry["real"][kScoreNames[m]] = agg_to_json(real_vals[m]);
      entry["synth"][kScoreNames[m]] = agg_to_json(synth_vals[m]);
      entry["gap"][kScoreNames[m]] = agg_to_json(gap_vals[m]);
      overall_gap_per_metric[m].insert(overall_gap_per_metric[m].end(), gap_vals[m].begin(),
                                       gap_vals[m].end());
    }
    per_classifier[to_string(kind)] = entry;
  }
  json body;
  body["per_classifier"] = per_classifier;
  for (std::size_t m = 0; m < 4; ++m) {
    body["average_gap"][kScoreNames[m]] = agg_to_json(overall_gap_per_metric[m]);
  }
  return body;
}

std::string utility_cells_csv(const UtilityResult& result) {
  std::string csv = "classifier,gen_seed,eval_seed,fraction,metric,value\n";
  for (const auto& cell : result.cells) {
    const auto emit = [&](const std::string& metric, double value) {
      csv += to_string(cell.kind) + "," + std::to_string(cell.gen_seed_index) + "," +
             std::to_string(cell.eval_seed_index) + ",," + metric + "," + format_double(value) +
             "\n";
    };
    const auto rv = score_values(cell.real);
    const auto sv = score_values(cell.synth);
    for (std::size_t m = 0; m < 4; ++m) {
      if (rv[m]) emit(std::string("real_") + kScoreNames[m], *rv[m]);
      if (sv[m]) emit(std::string("synth_") + kScoreNames[m], *sv[m]);
    }
  }
  return csv;
}

}  // namespace

void cmd_utility(const RunConfig& config, const std::string& model_path) {
  apply_threads(config);
  const ExperimentInputs in = load_experiment_inputs(config, model_path);

  ExperimentConfig exp;
  exp.n_gen_seeds = config.gen_seeds;
  exp.n_eval_seeds = config.eval_seeds;
  exp.base_seed = config.train.seed;
  const UtilityResult result = utility_experiment(in.train_enc, in.test_enc, in.model, exp);

  json report;
  report["report"] = "utility";
  report["config"] = json::parse(run_config_to_json_string(config));
  report["provenance"]["model"] = model_path;
  report["provenance"]["train_rows"] = in.train_enc.values.rows();
  report["provenance"]["test_rows"] = in.test_enc.values.rows();
  report["provenance"]["synth_rows_per_seed"] = result.synth_rows_per_seed;
  report["provenance"]["gen_seeds"] = config.gen_seeds;
  report["provenance"]["eval_seeds"] = config.eval_seeds;
  report["provenance"]["split_seed"] = split_seed(in.model.config.seed);
  report["provenance"]["note"] = kClassifierNote;
  report["results"] = utility_report_body(result);

  ensure_out_dir(config.out_dir);
  write_file_atomic(join_path(config.out_dir, "utility_report.json"), report.dump(2) + "\n");
  write_file_atomic(join_path(config.out_dir, "utility_cells.csv"), utility_cells_csv(result));
}

void cmd_augment(const RunConfig& config, const std::string& model_path) {
  apply_threads(config);
  const ExperimentInputs in = load_experiment_inputs(config, model_path);

  ExperimentConfig exp;
  exp.n_gen_seeds = config.gen_seeds;
  exp.n_eval_seeds = config.eval_seeds;
  exp.base_seed = config.train.seed;
  const AugmentationResult result =
      augmentation_experiment(in.train_enc, in.test_enc, in.model, config.fractions, exp);

  json per_fraction;
  for (double f : config.fractions) {
    std::vector<double> all_f1;
    json per_classifier;
    for (ClassifierKind kind : kAllClassifierKinds) {
      std::vector<double> vals;
      for (const auto& cell : result.cells) {
        if (cell.fraction == f && cell.kind == kind) vals.push_back(cell.f1);
      }
      per_classifier[to_string(kind)] = agg_to_json(vals);
      all_f1.insert(all_f1.end(), vals.begin(), vals.end());
    }
    json entry;
    entry["mean_f1"] = agg_to_json(all_f1);
    entry["per_classifier"] = per_classifier;
    per_fraction[format_double(f)] = entry;
  }

  json report;
  report["report"] = "augmentation";
  report["config"] = json::parse(run_config_to_json_string(config));
  report["provenance"]["model"] = model_path;
  report["provenance"]["train_rows"] = in.train_enc.values.rows();
  report["provenance"]["test_rows"] = in.test_enc.values.rows();
  report["provenance"]["fractions"] = config.fractions;
  report["provenance"]["baseline_fraction"] = 0.0;
  report["provenance"]["split_seed"] = split_seed(in.model.config.seed);
  report["provenance"]["note"] = kClassifierNote;
  report["per_fraction"] = per_fraction;

  std::string csv = "classifier,gen_seed,eval_seed,fraction,metric,value\n";
  for (const auto& cell : result.cells) {
    csv += to_string(cell.kind) + "," + std::to_string(cell.gen_seed_index) + "," +
           std::to_string(cell.eval_seed_index) + "," + format_double(cell.fraction) + ",f1," +
           format_double(cell.f1) + "\n";
  }

  ensure_out_dir(config.out_dir);
  write_file_atomic(join_path(config.out_dir, "augmentation_report.json"), report.dump(2) + "\n");
  write_file_atomic(join_path(config.out_dir, "augmentation_cells.csv"), csv);
}

// ---------------------------------------------------------------------
// make-toy-dataset
// ---------------------------------------------------------------------

void cmd_make_toy(const ToyOptions& options, const std::string& data_path,
                  const std::string& schema_path) {
  const ToyDataset toy = make_toy_dataset(options);
  write_file_atomic(data_path, table_to_csv_string(toy.table, toy.schema));
  write_file_atomic(schema_path, schema_to_json_string(toy.schema));
}

}  // namespace tabdiff
