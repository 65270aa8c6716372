#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tabdiff/commands.hpp"
#include "tabdiff/errors.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string data;
  std::string schema;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> eval_seeds;
  std::optional<std::size_t> gen_seeds;
  std::optional<double> mir_threshold;
  std::optional<double> mmd_bandwidth;
  std::vector<double> fractions;
  std::optional<int> threads;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON run configuration");
  cmd->add_option("--data", flags.data, "input CSV");
  cmd->add_option("--schema", flags.schema, "schema JSON");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "base seed");
  cmd->add_option("--eval-seeds", flags.eval_seeds, "number of evaluation seeds");
  cmd->add_option("--gen-seeds", flags.gen_seeds, "number of generation seeds");
  cmd->add_option("--mir-threshold", flags.mir_threshold, "explicit MIR distance threshold");
  cmd->add_option("--mmd-bandwidth", flags.mmd_bandwidth, "explicit MMD kernel bandwidth");
  cmd->add_option("--fractions", flags.fractions, "augmentation fractions");
  cmd->add_option("--threads", flags.threads, "max worker threads (0 = default)");
}

tabdiff::RunConfig build_config(const CommonFlags& flags) {
  tabdiff::RunConfig config;
  if (!flags.config_path.empty()) config = tabdiff::load_run_config(flags.config_path);
  if (!flags.data.empty()) config.data = flags.data;
  if (!flags.schema.empty()) config.schema = flags.schema;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.seed) config.train.seed = *flags.seed;
  if (flags.eval_seeds) config.eval_seeds = *flags.eval_seeds;
  if (flags.gen_seeds) config.gen_seeds = *flags.gen_seeds;
  if (flags.mir_threshold) config.mir_threshold = *flags.mir_threshold;
  if (flags.mmd_bandwidth) config.mmd_bandwidth = *flags.mmd_bandwidth;
  if (!flags.fractions.empty()) config.fractions = flags.fractions;
  if (flags.threads) config.threads = *flags.threads;
  if (config.data.empty()) throw tabdiff::ConfigError("no input data given (--data or config)");
  if (config.schema.empty()) throw tabdiff::ConfigError("no schema given (--schema or config)");
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-type tabular diffusion: train a generator, sample synthetic records, "
               "and score quality, privacy, utility, and augmentation"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, utility_flags, augment_flags;

  auto* train_cmd = app.add_subcommand("train", "train a generative model");
  add_common_flags(train_cmd, train_flags);

  auto* sample_cmd = app.add_subcommand("sample", "generate a synthetic CSV");
  std::string sample_model, sample_out;
  std::size_t sample_n = 0;
  std::uint64_t sample_seed = 0;
  bool sample_balanced = false;
  sample_cmd->add_option("--model", sample_model, "model file")->required();
  sample_cmd->add_option("--n", sample_n, "number of rows")->required();
  sample_cmd->add_option("--out", sample_out, "output CSV path")->required();
  sample_cmd->add_option("--seed", sample_seed, "sampling seed");
  sample_cmd->add_flag("--balanced", sample_balanced, "equal rows per target class");

  auto* eval_cmd = app.add_subcommand("evaluate", "quality and privacy metrics");
  std::string eval_synth;
  add_common_flags(eval_cmd, eval_flags);
  eval_cmd->add_option("--synth", eval_synth, "synthetic CSV")->required();

  auto* utility_cmd = app.add_subcommand("utility", "train-on-synthetic-test-on-real");
  std::string utility_model;
  add_common_flags(utility_cmd, utility_flags);
  utility_cmd->add_option("--model", utility_model, "model file")->required();

  auto* augment_cmd = app.add_subcommand("augment", "synthetic augmentation curve");
  std::string augment_model;
  add_common_flags(augment_cmd, augment_flags);
  augment_cmd->add_option("--model", augment_model, "model file")->required();

  auto* toy_cmd = app.add_subcommand("make-toy-dataset", "emit the bundled toy distribution");
  std::string toy_out, toy_schema_out, toy_kind = "mixed";
  tabdiff::ToyOptions toy_options;
  toy_cmd->add_option("--out", toy_out, "output CSV path")->required();
  toy_cmd->add_option("--schema-out", toy_schema_out, "output schema path")->required();
  toy_cmd->add_option("--kind", toy_kind, "mixed | continuous | categorical");
  toy_cmd->add_option("--n", toy_options.rows, "number of rows");
  toy_cmd->add_option("--positive-rate", toy_options.positive_rate, "target positive rate");
  toy_cmd->add_option("--seed", toy_options.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (train_cmd->parsed()) {
      tabdiff::cmd_train(build_config(train_flags));
    } else if (sample_cmd->parsed()) {
      tabdiff::cmd_sample(sample_model, sample_n, sample_balanced, sample_seed, sample_out);
    } else if (eval_cmd->parsed()) {
      tabdiff::cmd_evaluate(build_config(eval_flags), eval_synth);
    } else if (utility_cmd->parsed()) {
      tabdiff::cmd_utility(build_config(utility_flags), utility_model);
    } else if (augment_cmd->parsed()) {
      tabdiff::cmd_augment(build_config(augment_flags), augment_model);
    } else if (toy_cmd->parsed()) {
      toy_options.kind = tabdiff::toy_kind_from_string(toy_kind);
      tabdiff::cmd_make_toy(toy_options, toy_out, toy_schema_out);
    }
  } catch (const tabdiff::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const tabdiff::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
