#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "tabdiff/data_pipeline.hpp"
#include "tabdiff/denoiser.hpp"
#include "tabdiff/noise_schedule.hpp"
#include "tabdiff/parallel.hpp"
#include "tabdiff/rng.hpp"
#include "tabdiff/schema.hpp"

namespace tabdiff {

struct TrainConfig {
  int epochs = 500;
  int batch_size = 256;
  int timesteps = 1000;
  ScheduleKind schedule_kind = ScheduleKind::linear;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  std::vector<std::size_t> hidden_dims = {256, 256};
  std::size_t embed_dim = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

struct GenerativeModel {
  TableSchema schema;  // fitted
  NoiseSchedule schedule;
  DenoiserParams params;
  std::vector<double> class_prior;  // empty when unconditional
  TrainConfig config;

  bool conditional() const { return !class_prior.empty(); }
};

struct TrainResult {
  GenerativeModel model;
  std::vector<double> loss_trace;  // mean loss per epoch
};

// Minimizes the combined noise-prediction MSE plus the per-categorical KL
// terms averaged over the categorical feature count. Deterministic per
// seed for any thread count.
TrainResult train(const EncodedMatrix& train_matrix, const TableSchema& fitted_schema,
                  const TrainConfig& config, Exec exec = Exec::parallel);

// Ancestral sampler: continuous block from the standard normal prior,
// categorical blocks from the uniform prior, denoised t = T..1. Labels are
// fixed per sample (balanced: round-robin over classes, so ceil(n/K) per
// class truncated to n; otherwise drawn from the empirical prior) and
// conditioned on throughout. Final continuous values are clipped to [0,1].
EncodedMatrix generate_encoded(const GenerativeModel& model, std::size_t n, bool balanced,
                               std::uint64_t seed, Exec exec = Exec::parallel);

// Same, decoded back to a raw table (labels fill the target column).
RawTable generate(const GenerativeModel& model, std::size_t n, bool balanced,
                  std::uint64_t seed, Exec exec = Exec::parallel);

std::string model_to_json_string(const GenerativeModel& model);
GenerativeModel model_from_json_string(const std::string& text);
void save_model(const std::string& path, const GenerativeModel& model);
GenerativeModel load_model(const std::string& path);

nlohmann::ordered_json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);

// One pre-drawn minibatch corruption; exposed for the gradient tests and
// the kernel benchmark.
struct CorruptedBatch {
  Matrix x_t;   // noisy encoded rows
  Matrix x0;    // clean encoded rows
  Matrix eps;   // injected Gaussian noise (n_cont columns)
  std::vector<int> t;
  std::vector<int> labels;  // empty when unconditional
};

CorruptedBatch corrupt_batch(const Matrix& x0_rows, const std::vector<int>& labels,
                             const EncodingLayout& layout, const NoiseSchedule& schedule,
                             Rng& rng);

// Loss of one corrupted batch and its parameter gradients (accumulated into
// zeroed `grads`). Pure in all inputs; chunked so serial and parallel
// execution agree bitwise.
double batch_loss_and_grads(const DenoiserParams& params, const NoiseSchedule& schedule,
                            const EncodingLayout& layout, const CorruptedBatch& batch,
                            DenoiserParams& grads, Exec exec);

}  // namespace tabdiff
