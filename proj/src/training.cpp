#include "tabdiff/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "tabdiff/errors.hpp"
#include "tabdiff/gaussian_diffusion.hpp"
#include "tabdiff/multinomial_diffusion.hpp"

namespace tabdiff {

namespace {

using json = nlohmann::ordered_json;

constexpr std::size_t kRowChunk = 32;
constexpr std::uint64_t kLabelStream = 0xfeedbee5ULL;

}  // namespace

CorruptedBatch corrupt_batch(const Matrix& x0_rows, const std::vector<int>& labels,
                             const EncodingLayout& layout, const NoiseSchedule& schedule,
                             Rng& rng) {
  const std::size_t n = x0_rows.rows();
  CorruptedBatch batch;
  batch.x0 = x0_rows;
  batch.x_t = Matrix(n, layout.width);
  batch.eps = Matrix(n, layout.n_cont);
  batch.t.resize(n);
  batch.labels = labels;

  for (std::size_t r = 0; r < n; ++r) {
    const int t = 1 + static_cast<int>(rng.uniform_int(schedule.timesteps));
    batch.t[r] = t;
    if (layout.n_cont > 0) {
      rng.fill_normal(batch.eps.row(r));
      q_sample_gauss(x0_rows.row(r).first(layout.n_cont), t, batch.eps.row(r), schedule,
                     batch.x_t.row(r).first(layout.n_cont));
    }
    for (const auto& block : layout.cat_blocks) {
      const auto x0_block = x0_rows.row(r).subspan(block.offset, block.cardinality);
      const std::size_t level = q_sample_cat(x0_block, t, schedule, rng);
      write_onehot(level, batch.x_t.row(r).subspan(block.offset, block.cardinality));
    }
  }
  return batch;
}

double batch_loss_and_grads(const DenoiserParams& params, const NoiseSchedule& schedule,
                            const EncodingLayout& layout, const CorruptedBatch& batch,
                            DenoiserParams& grads, Exec exec) {
  const std::size_t n = batch.x_t.rows();
  if (n == 0) return 0.0;
  const double n_cat = static_cast<double>(layout.cat_blocks.size());
  const double batch_n = static_cast<double>(n);

  const auto table = build_time_table(params, schedule.timesteps, batch.t, exec);

  const std::size_t n_chunks = (n + kRowChunk - 1) / kRowChunk;
  std::vector<DenoiserParams> chunk_grads(n_chunks);
  std::vector<double> chunk_loss(n_chunks, 0.0);
  for (auto& g : chunk_grads) g = zeros_like(params);

  for_each_chunk(n, kRowChunk, exec, [&](std::size_t c, std::size_t begin, std::size_t end) {
    DenoiserCache cache;
    std::vector<double> d_out(layout.width);
    std::vector<double> d_logits;
    double loss = 0.0;
    for (std::size_t r = begin; r < end; ++r) {
      const int label = batch.labels.empty() ? -1 : batch.labels[r];
      denoiser_forward(params, table, batch.x_t.row(r), batch.t[r], label, cache);
      std::fill(d_out.begin(), d_out.end(), 0.0);

      if (layout.n_cont > 0) {
        double mse = 0.0;
        for (std::size_t i = 0; i < layout.n_cont; ++i) {
          const double diff = cache.out[i] - batch.eps(r, i);
          mse += diff * diff;
          d_out[i] = 2.0 * diff / (static_cast<double>(layout.n_cont) * batch_n);
        }
        loss += mse / (static_cast<double>(layout.n_cont) * batch_n);
      }

      for (const auto& block : layout.cat_blocks) {
        const auto x0_block = batch.x0.row(r).subspan(block.offset, block.cardinality);
        const auto xt_block = batch.x_t.row(r).subspan(block.offset, block.cardinality);
        const auto logits =
            std::span<const double>(cache.out).subspan(block.offset, block.cardinality);
        d_logits.resize(block.cardinality);
        const double kl =
            cat_kl_loss_grad(x0_block, xt_block, logits, batch.t[r], schedule, d_logits);
        loss += kl / (n_cat * batch_n);
        for (std::size_t k = 0; k < block.cardinality; ++k) {
          d_out[block.offset + k] = d_logits[k] / (n_cat * batch_n);
        }
      }

      denoiser_backward(params, table, cache, d_out, chunk_grads[c]);
    }
    chunk_loss[c] = loss;
  });

  double total_loss = 0.0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    total_loss += chunk_loss[c];
    add_tensors(grads, chunk_grads[c]);
  }
  return total_loss;
}

TrainResult train(const EncodedMatrix& train_matrix, const TableSchema& fitted_schema,
                  const TrainConfig& config, Exec exec) {
  fitted_schema.validate();
  if (!fitted_schema.is_fitted()) throw ConfigError("train requires a fitted schema");
  if (config.epochs < 1 || config.batch_size < 1 || config.timesteps < 1) {
    throw ConfigError("epochs, batch_size, and timesteps must all be >= 1");
  }
  const std::size_t n = train_matrix.values.rows();
  if (n == 0) throw ConfigError("training matrix is empty");

  const auto layout = make_layout(fitted_schema);
  if (layout.width == 0) {
    throw ConfigError("schema declares no feature columns besides the target");
  }
  if (train_matrix.values.cols() != layout.width) {
    throw ConfigError("training matrix width does not match the schema encoding");
  }
  const bool conditional = fitted_schema.is_conditional();
  if (conditional && train_matrix.labels.size() != n) {
    throw ConfigError("conditional schema requires one label per training row");
  }
  if (!conditional && !train_matrix.labels.empty()) {
    throw ConfigError("labels supplied for an unconditional schema");
  }

  GenerativeModel model;
  model.schema = fitted_schema;
  model.config = config;
  model.schedule =
      make_schedule(config.timesteps, config.schedule_kind, config.beta_start, config.beta_end);

  DenoiserDims dims;
  dims.input_width = layout.width;
  dims.embed_dim = config.embed_dim;
  dims.hidden_dims = config.hidden_dims;
  dims.n_classes = conditional ? fitted_schema.n_target_classes() : 0;
  model.params = init_params(dims, config.seed);

  if (conditional) {
    model.class_prior.assign(dims.n_classes, 0.0);
    for (int y : train_matrix.labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= dims.n_classes) {
        throw ConfigError("training label out of range");
      }
      model.class_prior[y] += 1.0;
    }
    for (double& p : model.class_prior) p /= static_cast<double>(n);
  }

  AdamConfig adam_cfg;
  adam_cfg.lr = config.lr;
  AdamState adam = make_adam_state(model.params, adam_cfg);

  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<double> trace;
  trace.reserve(config.epochs);
  DenoiserParams grads = zeros_like(model.params);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_int(i + 1);
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    int batch_index = 0;
    // Full shuffled pass; the final partial batch is kept.
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      Matrix x0_rows(stop - start, layout.width);
      std::vector<int> labels;
      if (conditional) labels.resize(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const auto src = train_matrix.values.row(order[i]);
        std::copy(src.begin(), src.end(), x0_rows.row(i - start).begin());
        if (conditional) labels[i - start] = train_matrix.labels[order[i]];
      }

      const auto batch = corrupt_batch(x0_rows, labels, layout, model.schedule, rng);
      zero_tensors(grads);
      const double loss =
          batch_loss_and_grads(model.params, model.schedule, layout, batch, grads, exec);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(batch_index + 1));
      }
      adam_step(model.params, grads, adam);
      epoch_loss += loss * static_cast<double>(stop - start);
    }
    trace.push_back(epoch_loss / static_cast<double>(n));
  }

  if (!all_finite(model.params)) {
    throw NumericError("non-finite parameters after training");
  }
  return {std::move(model), std::move(trace)};
}

EncodedMatrix generate_encoded(const GenerativeModel& model, std::size_t n, bool balanced,
                               std::uint64_t seed, Exec exec) {
  if (n < 1) throw ConfigError("generate requires n >= 1");
  if (balanced && !model.conditional()) {
    throw ConfigError("balanced sampling requires a class-conditional model");
  }
  const auto layout = make_layout(model.schema);
  const auto& schedule = model.schedule;
  const Rng base(seed);

  std::vector<int> labels;
  if (model.conditional()) {
    const std::size_t k = model.class_prior.size();
    labels.resize(n);
    if (balanced) {
      for (std::size_t r = 0; r < n; ++r) labels[r] = static_cast<int>(r % k);
    } else {
      Rng label_rng = base.derive(kLabelStream);
      for (std::size_t r = 0; r < n; ++r) {
        labels[r] = static_cast<int>(label_rng.categorical(model.class_prior));
      }
    }
  }

  // Parameters are frozen, so the whole time path is shared by every row
  // and chain step.
  const auto table = build_time_table(model.params, schedule.timesteps, exec);

  EncodedMatrix out;
  out.values = Matrix(n, layout.width);
  out.labels = labels;

  // Each row owns a stream derived from (seed, row), so sharding across
  // threads cannot change the output.
  for_each_index(n, exec, [&](std::size_t r) {
    Rng rng = base.derive(r);
    DenoiserCache cache;
    std::vector<double> x(layout.width, 0.0);
    std::vector<double> z(layout.n_cont);

    for (std::size_t i = 0; i < layout.n_cont; ++i) x[i] = rng.normal();
    for (const auto& block : layout.cat_blocks) {
      const std::size_t level = rng.uniform_int(block.cardinality);
      write_onehot(level, std::span<double>(x).subspan(block.offset, block.cardinality));
    }

    const int label = labels.empty() ? -1 : labels[r];
    for (int t = schedule.timesteps; t >= 1; --t) {
      denoiser_forward(model.params, table, x, t, label, cache);
      if (layout.n_cont > 0) {
        if (t > 1) rng.fill_normal(z);
        p_sample_gauss(std::span<const double>(x).first(layout.n_cont), t,
                       std::span<const double>(cache.out).first(layout.n_cont), schedule, z,
                       std::span<double>(x).first(layout.n_cont));
      }
      for (const auto& block : layout.cat_blocks) {
        const auto xt_block = std::span<const double>(x).subspan(block.offset, block.cardinality);
        const auto logits =
            std::span<const double>(cache.out).subspan(block.offset, block.cardinality);
        const std::size_t level = p_sample_cat(xt_block, logits, t, schedule, rng);
        write_onehot(level, std::span<double>(x).subspan(block.offset, block.cardinality));
      }
    }

    for (std::size_t i = 0; i < layout.n_cont; ++i) x[i] = std::clamp(x[i], 0.0, 1.0);
    std::copy(x.begin(), x.end(), out.values.row(r).begin());
  });
  return out;
}

RawTable generate(const GenerativeModel& model, std::size_t n, bool balanced,
                  std::uint64_t seed, Exec exec) {
  return inverse_transform(generate_encoded(model, n, balanced, seed, exec), model.schema);
}

json train_config_to_json(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["timesteps"] = c.timesteps;
  j["schedule"] = to_string(c.schedule_kind);
  j["beta_start"] = c.beta_start;
  j["beta_end"] = c.beta_end;
  j["hidden_dims"] = c.hidden_dims;
  j["embed_dim"] = c.embed_dim;
  j["lr"] = c.lr;
  j["seed"] = c.seed;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.timesteps = j.at("timesteps").get<int>();
  c.schedule_kind = schedule_kind_from_string(j.at("schedule").get<std::string>());
  c.beta_start = j.at("beta_start").get<double>();
  c.beta_end = j.at("beta_end").get<double>();
  c.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.lr = j.at("lr").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string model_to_json_string(const GenerativeModel& model) {
  json j;
  j["format"] = "tabdiff-model";
  j["version"] = 1;
  j["schema"] = json::parse(schema_to_json_string(model.schema));
  j["train_config"] = train_config_to_json(model.config);
  j["class_prior"] = model.class_prior;
  json d;
  d["input_width"] = model.params.dims.input_width;
  d["embed_dim"] = model.params.dims.embed_dim;
  d["hidden_dims"] = model.params.dims.hidden_dims;
  d["n_classes"] = model.params.dims.n_classes;
  json tensors;
  for (const auto& ref : tensor_refs(model.params)) tensors[ref.name] = *ref.data;
  d["tensors"] = tensors;
  j["denoiser"] = d;
  return j.dump(2) + "\n";
}

GenerativeModel model_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "tabdiff-model") {
      throw ConfigError("not a model file");
    }
    GenerativeModel model;
    model.schema = schema_from_json_string(j.at("schema").dump());
    model.config = train_config_from_json(j.at("train_config"));
    model.class_prior = j.at("class_prior").get<std::vector<double>>();
    model.schedule = make_schedule(model.config.timesteps, model.config.schedule_kind,
                                   model.config.beta_start, model.config.beta_end);

    const auto& d = j.at("denoiser");
    DenoiserDims dims;
    dims.input_width = d.at("input_width").get<std::size_t>();
    dims.embed_dim = d.at("embed_dim").get<std::size_t>();
    dims.hidden_dims = d.at("hidden_dims").get<std::vector<std::size_t>>();
    dims.n_classes = d.at("n_classes").get<std::size_t>();
    model.params = init_params(dims, 0);
    for (auto& ref : tensor_refs(model.params)) {
      const auto values = d.at("tensors").at(ref.name).get<std::vector<double>>();
      if (values.size() != ref.data->size()) {
        throw ConfigError("tensor '" + ref.name + "' has wrong size in model file");
      }
      *ref.data = values;
    }
    return model;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::string& path, const GenerativeModel& model) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file '" + path + "'");
  out << model_to_json_string(model);
}

GenerativeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json_string(buf.str());
}

}  // namespace tabdiff
