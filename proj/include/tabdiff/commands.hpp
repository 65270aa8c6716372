#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tabdiff/experiments.hpp"
#include "tabdiff/toy_data.hpp"
#include "tabdiff/training.hpp"

namespace tabdiff {

// Everything a run needs, loadable from a JSON config file with flag
// overrides on top. All randomness flows from train.seed; nothing reads
// the clock or the environment.
struct RunConfig {
  std::string data;
  std::string schema;
  std::string out_dir = "out";
  TrainConfig train;
  std::size_t gen_seeds = 5;
  std::size_t eval_seeds = 3;
  std::optional<double> mir_threshold;
  std::optional<double> mmd_bandwidth;
  std::vector<double> fractions = kDefaultFractions;
  int threads = 0;  // 0 keeps the runtime default
};

RunConfig run_config_from_json_string(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json_string(const RunConfig& config);

// Splits and holdouts everywhere derive from the training seed through
// this one function, so train/evaluate/utility agree on the partition.
std::uint64_t split_seed(std::uint64_t train_seed);

// train: writes <out_dir>/model.json and <out_dir>/loss.csv.
void cmd_train(const RunConfig& config);

// sample: writes a CSV with header and n rows to out_path.
void cmd_sample(const std::string& model_path, std::size_t n, bool balanced,
                std::uint64_t seed, const std::string& out_path);

// evaluate: quality and privacy metrics of synth_path against config.data;
// writes eval_report.json plus the paired per-dimension vectors as CSV.
void cmd_evaluate(const RunConfig& config, const std::string& synth_path);

// utility / augment: downstream experiments against a trained model;
// write a report JSON and a tidy cells CSV each.
void cmd_utility(const RunConfig& config, const std::string& model_path);
void cmd_augment(const RunConfig& config, const std::string& model_path);

void cmd_make_toy(const ToyOptions& options, const std::string& data_path,
                  const std::string& schema_path);

}  // namespace tabdiff
