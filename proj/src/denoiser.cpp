#include "tabdiff/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "tabdiff/errors.hpp"
#include "tabdiff/noise_schedule.hpp"
#include "tabdiff/rng.hpp"

namespace tabdiff {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

namespace {

// y = W x + b
void affine(const Matrix& w, std::span<const double> b, std::span<const double> x,
            std::span<double> y) {
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const auto row = w.row(i);
    double acc = b[i];
    for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

// dW += dy x^T, db += dy, dx = W^T dy (dx may be empty)
void affine_backward(const Matrix& w, std::span<const double> x, std::span<const double> dy,
                     Matrix& dw, std::span<double> db, std::span<double> dx) {
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double g = dy[i];
    auto dw_row = dw.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) dw_row[j] += g * x[j];
    db[i] += g;
  }
  if (!dx.empty()) {
    for (std::size_t j = 0; j < dx.size(); ++j) dx[j] = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const double g = dy[i];
      const auto row = w.row(i);
      for (std::size_t j = 0; j < dx.size(); ++j) dx[j] += row[j] * g;
    }
  }
}

void check_label(const DenoiserDims& dims, int label) {
  if (dims.conditional()) {
    if (label < 0 || static_cast<std::size_t>(label) >= dims.n_classes) {
      throw ConfigError("class label " + std::to_string(label) + " out of range [0, " +
                        std::to_string(dims.n_classes) + ")");
    }
  } else if (label >= 0) {
    throw ConfigError("label supplied to an unconditional denoiser");
  }
}

}  // namespace

std::vector<TensorRef> tensor_refs(DenoiserParams& p) {
  std::vector<TensorRef> refs = {
      {"w_in", &p.w_in.values()},       {"b_in", &p.b_in},
      {"w_time1", &p.w_time1.values()}, {"b_time1", &p.b_time1},
      {"w_time2", &p.w_time2.values()}, {"b_time2", &p.b_time2},
  };
  for (std::size_t i = 0; i < p.w_hidden.size(); ++i) {
    refs.push_back({"w_hidden" + std::to_string(i), &p.w_hidden[i].values()});
    refs.push_back({"b_hidden" + std::to_string(i), &p.b_hidden[i]});
  }
  refs.push_back({"w_out", &p.w_out.values()});
  refs.push_back({"b_out", &p.b_out});
  if (p.dims.conditional()) refs.push_back({"class_embed", &p.class_embed.values()});
  return refs;
}

std::vector<ConstTensorRef> tensor_refs(const DenoiserParams& p) {
  auto mutable_refs = tensor_refs(const_cast<DenoiserParams&>(p));
  std::vector<ConstTensorRef> refs;
  refs.reserve(mutable_refs.size());
  for (auto& r : mutable_refs) refs.push_back({r.name, r.data});
  return refs;
}

DenoiserParams init_params(const DenoiserDims& dims, std::uint64_t seed) {
  if (dims.hidden_dims.empty()) throw ConfigError("denoiser needs at least one hidden layer");
  if (dims.embed_dim == 0 || dims.embed_dim % 2 != 0) {
    throw ConfigError("embed_dim must be even and positive");
  }
  const std::size_t h0 = dims.hidden_dims.front();
  const std::size_t h_last = dims.hidden_dims.back();

  DenoiserParams p;
  p.dims = dims;
  p.w_in = Matrix(h0, dims.input_width);
  p.b_in.assign(h0, 0.0);
  p.w_time1 = Matrix(dims.embed_dim, dims.embed_dim);
  p.b_time1.assign(dims.embed_dim, 0.0);
  p.w_time2 = Matrix(h0, dims.embed_dim);
  p.b_time2.assign(h0, 0.0);
  for (std::size_t i = 1; i < dims.hidden_dims.size(); ++i) {
    p.w_hidden.emplace_back(dims.hidden_dims[i], dims.hidden_dims[i - 1]);
    p.b_hidden.emplace_back(dims.hidden_dims[i], 0.0);
  }
  p.w_out = Matrix(dims.input_width, h_last);
  p.b_out.assign(dims.input_width, 0.0);
  if (dims.conditional()) p.class_embed = Matrix(dims.n_classes, h0);

  // Symmetric uniform weights scaled by 1/sqrt(fan_in); biases stay zero.
  Rng rng(seed);
  auto fill = [&](Matrix& w, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w.values()) v = (2.0 * rng.uniform() - 1.0) * bound;
  };
  fill(p.w_in, dims.input_width);
  fill(p.w_time1, dims.embed_dim);
  fill(p.w_time2, dims.embed_dim);
  for (std::size_t i = 0; i < p.w_hidden.size(); ++i) fill(p.w_hidden[i], dims.hidden_dims[i]);
  fill(p.w_out, h_last);
  if (dims.conditional()) fill(p.class_embed, h0);
  return p;
}

DenoiserParams zeros_like(const DenoiserParams& p) {
  DenoiserParams z = p;
  zero_tensors(z);
  return z;
}

void zero_tensors(DenoiserParams& p) {
  for (auto& ref : tensor_refs(p)) {
    std::fill(ref.data->begin(), ref.data->end(), 0.0);
  }
}

bool all_finite(const DenoiserParams& p) {
  for (const auto& ref : tensor_refs(p)) {
    for (double v : *ref.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void add_tensors(DenoiserParams& dst, const DenoiserParams& src) {
  auto d_refs = tensor_refs(dst);
  auto s_refs = tensor_refs(const_cast<DenoiserParams&>(src));
  for (std::size_t ti = 0; ti < d_refs.size(); ++ti) {
    auto& dv = *d_refs[ti].data;
    const auto& sv = *s_refs[ti].data;
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += sv[i];
  }
}

namespace {

void fill_time_row(const DenoiserParams& p, TimeEmbedTable& table, std::size_t t) {
  const std::size_t e = p.dims.embed_dim;
  sin_time_embed(static_cast<int>(t), e, table.e0.row(t).data());
  affine(p.w_time1, p.b_time1, table.e0.row(t), table.u1.row(t));
  auto a1 = table.a1.row(t);
  const auto u1 = table.u1.row(t);
  for (std::size_t i = 0; i < e; ++i) a1[i] = silu(u1[i]);
  affine(p.w_time2, p.b_time2, a1, table.temb.row(t));
}

TimeEmbedTable make_empty_time_table(const DenoiserParams& p, int t_max) {
  TimeEmbedTable table;
  table.e0 = Matrix(t_max + 1, p.dims.embed_dim);
  table.u1 = Matrix(t_max + 1, p.dims.embed_dim);
  table.a1 = Matrix(t_max + 1, p.dims.embed_dim);
  table.temb = Matrix(t_max + 1, p.dims.hidden_dims.front());
  return table;
}

}  // namespace

TimeEmbedTable build_time_table(const DenoiserParams& p, int t_max, Exec exec) {
  TimeEmbedTable table = make_empty_time_table(p, t_max);
  for_each_index(static_cast<std::size_t>(t_max) + 1, exec,
                 [&](std::size_t t) { fill_time_row(p, table, t); });
  return table;
}

TimeEmbedTable build_time_table(const DenoiserParams& p, int t_max, std::span<const int> ts,
                                Exec exec) {
  TimeEmbedTable table = make_empty_time_table(p, t_max);
  std::vector<int> unique_ts(ts.begin(), ts.end());
  std::sort(unique_ts.begin(), unique_ts.end());
  unique_ts.erase(std::unique(unique_ts.begin(), unique_ts.end()), unique_ts.end());
  for_each_index(unique_ts.size(), exec, [&](std::size_t i) {
    fill_time_row(p, table, static_cast<std::size_t>(unique_ts[i]));
  });
  return table;
}

void denoiser_forward(const DenoiserParams& p, const TimeEmbedTable& table,
                      std::span<const double> x, int t, int label, DenoiserCache& cache) {
  if (x.size() != p.dims.input_width) {
    throw ConfigError("denoiser input width mismatch");
  }
  check_label(p.dims, label);

  const std::size_t n_layers = p.dims.hidden_dims.size();
  cache.t = t;
  cache.label = label;
  cache.x.assign(x.begin(), x.end());
  cache.u0.resize(p.dims.hidden_dims.front());
  cache.u_h.resize(n_layers - 1);
  cache.a.resize(n_layers);
  cache.out.resize(p.dims.input_width);

  affine(p.w_in, p.b_in, x, cache.u0);
  const auto temb = table.temb.row(t);
  for (std::size_t i = 0; i < cache.u0.size(); ++i) cache.u0[i] += temb[i];
  if (label >= 0) {
    const auto emb = p.class_embed.row(label);
    for (std::size_t i = 0; i < cache.u0.size(); ++i) cache.u0[i] += emb[i];
  }

  cache.a[0].resize(cache.u0.size());
  for (std::size_t i = 0; i < cache.u0.size(); ++i) cache.a[0][i] = silu(cache.u0[i]);

  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    cache.u_h[l].resize(p.dims.hidden_dims[l + 1]);
    affine(p.w_hidden[l], p.b_hidden[l], cache.a[l], cache.u_h[l]);
    cache.a[l + 1].resize(cache.u_h[l].size());
    for (std::size_t i = 0; i < cache.u_h[l].size(); ++i) {
      cache.a[l + 1][i] = silu(cache.u_h[l][i]);
    }
  }

  affine(p.w_out, p.b_out, cache.a.back(), cache.out);
}

std::vector<double> denoiser_forward(const DenoiserParams& p, std::span<const double> x,
                                     int t, int label) {
  const auto table = build_time_table(p, t, Exec::serial);
  DenoiserCache cache;
  denoiser_forward(p, table, x, t, label, cache);
  return cache.out;
}

void denoiser_backward(const DenoiserParams& p, const TimeEmbedTable& table,
                       const DenoiserCache& cache, std::span<const double> d_out,
                       DenoiserParams& grads) {
  if (cache.out.size() != d_out.size() || cache.x.size() != p.dims.input_width) {
    throw ConfigError("denoiser backward: cache does not match parameters");
  }
  const std::size_t n_layers = p.dims.hidden_dims.size();

  std::vector<double> d_act(p.dims.hidden_dims.back());
  affine_backward(p.w_out, cache.a.back(), d_out, grads.w_out, grads.b_out, d_act);

  for (std::size_t l = n_layers - 1; l-- > 0;) {
    auto& u = cache.u_h[l];
    std::vector<double> d_u(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) d_u[i] = d_act[i] * silu_grad(u[i]);
    d_act.assign(p.dims.hidden_dims[l], 0.0);
    affine_backward(p.w_hidden[l], cache.a[l], d_u, grads.w_hidden[l], grads.b_hidden[l], d_act);
  }

  // d_act now holds the gradient at a[0]; push through the input injection.
  std::vector<double> d_u0(cache.u0.size());
  for (std::size_t i = 0; i < cache.u0.size(); ++i) d_u0[i] = d_act[i] * silu_grad(cache.u0[i]);

  affine_backward(p.w_in, cache.x, d_u0, grads.w_in, grads.b_in, {});

  if (cache.label >= 0) {
    auto emb_grad = grads.class_embed.row(cache.label);
    for (std::size_t i = 0; i < d_u0.size(); ++i) emb_grad[i] += d_u0[i];
  }

  // Time-MLP path: d_u0 is also the gradient at temb.
  const int t = cache.t;
  std::vector<double> d_a1(p.dims.embed_dim);
  affine_backward(p.w_time2, table.a1.row(t), d_u0, grads.w_time2, grads.b_time2, d_a1);
  const auto u1 = table.u1.row(t);
  std::vector<double> d_u1(u1.size());
  for (std::size_t i = 0; i < u1.size(); ++i) d_u1[i] = d_a1[i] * silu_grad(u1[i]);
  affine_backward(p.w_time1, table.e0.row(t), d_u1, grads.w_time1, grads.b_time1, {});
}

AdamState make_adam_state(const DenoiserParams& params, AdamConfig config) {
  AdamState state;
  state.m = zeros_like(params);
  state.v = zeros_like(params);
  state.step = 0;
  state.config = config;
  return state;
}

void adam_step(DenoiserParams& params, const DenoiserParams& grads, AdamState& state) {
  state.step += 1;
  const auto& cfg = state.config;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  auto p_refs = tensor_refs(params);
  auto g_refs = tensor_refs(const_cast<DenoiserParams&>(grads));
  auto m_refs = tensor_refs(state.m);
  auto v_refs = tensor_refs(state.v);
  for (std::size_t ti = 0; ti < p_refs.size(); ++ti) {
    auto& pv = *p_refs[ti].data;
    const auto& gv = *g_refs[ti].data;
    auto& mv = *m_refs[ti].data;
    auto& vv = *v_refs[ti].data;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = cfg.beta1 * mv[i] + (1.0 - cfg.beta1) * gv[i];
      vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / bc1;
      const double v_hat = vv[i] / bc2;
      pv[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace tabdiff
