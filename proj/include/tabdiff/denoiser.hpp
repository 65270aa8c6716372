#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabdiff/matrix.hpp"
#include "tabdiff/parallel.hpp"

namespace tabdiff {

struct DenoiserDims {
  std::size_t input_width = 0;  // n_cont + sum of categorical cardinalities
  std::size_t embed_dim = 128;
  std::vector<std::size_t> hidden_dims = {256, 256};
  std::size_t n_classes = 0;  // 0 = unconditional

  bool conditional() const { return n_classes > 0; }
};

// Reverse-process network: input projection plus a sinusoidal-time MLP
// (Linear, SiLU, Linear) whose output is injected additively, followed by
// SiLU hidden layers and a linear head producing the continuous noise
// prediction and the per-categorical logits in one vector. In conditional
// mode a class-embedding row is added to the time embedding.
struct DenoiserParams {
  DenoiserDims dims;

  Matrix w_in;                  // h0 x input_width
  std::vector<double> b_in;     // h0
  Matrix w_time1;               // E x E
  std::vector<double> b_time1;  // E
  Matrix w_time2;               // h0 x E
  std::vector<double> b_time2;  // h0
  std::vector<Matrix> w_hidden;
  std::vector<std::vector<double>> b_hidden;
  Matrix w_out;                 // input_width x h_last
  std::vector<double> b_out;    // input_width
  Matrix class_embed;           // n_classes x h0 (absent when unconditional)
};

struct TensorRef {
  std::string name;
  std::vector<double>* data;
};
struct ConstTensorRef {
  std::string name;
  const std::vector<double>* data;
};

// Canonical tensor ordering shared by init, Adam, serialization, and the
// gradient checks.
std::vector<TensorRef> tensor_refs(DenoiserParams& p);
std::vector<ConstTensorRef> tensor_refs(const DenoiserParams& p);

DenoiserParams init_params(const DenoiserDims& dims, std::uint64_t seed);
DenoiserParams zeros_like(const DenoiserParams& p);
void zero_tensors(DenoiserParams& p);
bool all_finite(const DenoiserParams& p);

// dst += src over every tensor.
void add_tensors(DenoiserParams& dst, const DenoiserParams& src);

// Time path evaluated once per distinct timestep; rows are indexed by t.
// Shared read-only across rows of a batch or a sampling step.
struct TimeEmbedTable {
  Matrix e0;    // (t_max+1) x E, sinusoidal embedding
  Matrix u1;    // (t_max+1) x E, first linear preactivation
  Matrix a1;    // (t_max+1) x E, SiLU(u1)
  Matrix temb;  // (t_max+1) x h0, second linear output
};

TimeEmbedTable build_time_table(const DenoiserParams& p, int t_max,
                                Exec exec = Exec::serial);

// Fills only the listed timesteps (deduplicated by the caller or not; rows
// are recomputed idempotently). Used per minibatch, where only the drawn
// t values are needed.
TimeEmbedTable build_time_table(const DenoiserParams& p, int t_max, std::span<const int> ts,
                                Exec exec);

struct DenoiserCache {
  int t = 0;
  int label = -1;
  std::vector<double> x;
  std::vector<double> u0;                 // input projection + time/class injection
  std::vector<std::vector<double>> u_h;   // hidden preactivations
  std::vector<std::vector<double>> a;     // a[0] = SiLU(u0), then hidden activations
  std::vector<double> out;
};

// Forward pass for one row; cache.out holds eps_hat followed by the
// categorical logit blocks. label must be a valid class in conditional
// mode and negative otherwise.
void denoiser_forward(const DenoiserParams& p, const TimeEmbedTable& table,
                      std::span<const double> x, int t, int label, DenoiserCache& cache);

// Convenience single-shot forward (builds the time path for t internally).
std::vector<double> denoiser_forward(const DenoiserParams& p, std::span<const double> x,
                                     int t, int label);

// Reverse-mode gradients of <cache.out, d_out> accumulated into grads,
// including the time-MLP and class-embedding paths.
void denoiser_backward(const DenoiserParams& p, const TimeEmbedTable& table,
                       const DenoiserCache& cache, std::span<const double> d_out,
                       DenoiserParams& grads);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  DenoiserParams m;
  DenoiserParams v;
  long step = 0;
  AdamConfig config;
};

AdamState make_adam_state(const DenoiserParams& params, AdamConfig config);

// Standard bias-corrected update; increments the step counter.
void adam_step(DenoiserParams& params, const DenoiserParams& grads, AdamState& state);

double silu(double x);
double silu_grad(double x);

}  // namespace tabdiff
