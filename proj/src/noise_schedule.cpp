#include "tabdiff/noise_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tabdiff/errors.hpp"

namespace tabdiff {

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "linear") return ScheduleKind::linear;
  if (s == "cosine") return ScheduleKind::cosine;
  throw ConfigError("unknown schedule kind '" + s + "' (expected linear or cosine)");
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::linear ? "linear" : "cosine";
}

namespace {

std::vector<double> linear_betas(int timesteps, double beta_start, double beta_end) {
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ConfigError("linear schedule requires 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(timesteps);
  if (timesteps == 1) {
    betas[0] = beta_start;
    return betas;
  }
  const double step = (beta_end - beta_start) / static_cast<double>(timesteps - 1);
  for (int t = 0; t < timesteps; ++t) {
    betas[t] = beta_start + step * static_cast<double>(t);
  }
  betas.back() = beta_end;
  return betas;
}

// Cosine alpha_bar construction with betas capped at 0.999.
std::vector<double> cosine_betas(int timesteps) {
  auto f = [](double u) {
    const double x = (u + 0.008) / 1.008 * std::numbers::pi / 2.0;
    const double c = std::cos(x);
    return c * c;
  };
  const double f0 = f(0.0);
  std::vector<double> betas(timesteps);
  for (int t = 0; t < timesteps; ++t) {
    const double a_prev = f(static_cast<double>(t) / timesteps) / f0;
    const double a_cur = f(static_cast<double>(t + 1) / timesteps) / f0;
    betas[t] = std::min(1.0 - a_cur / a_prev, 0.999);
  }
  return betas;
}

}  // namespace

NoiseSchedule make_schedule(int timesteps, ScheduleKind kind, double beta_start,
                            double beta_end) {
  if (timesteps < 1) throw ConfigError("schedule requires timesteps >= 1");

  NoiseSchedule s;
  s.timesteps = timesteps;
  s.kind = kind;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.beta = kind == ScheduleKind::linear ? linear_betas(timesteps, beta_start, beta_end)
                                        : cosine_betas(timesteps);

  s.alpha.resize(timesteps);
  s.alpha_bar.resize(timesteps);
  double prod = 1.0;
  for (int t = 0; t < timesteps; ++t) {
    if (!(s.beta[t] > 0.0 && s.beta[t] < 1.0)) {
      throw ConfigError("schedule produced beta outside (0, 1)");
    }
    s.alpha[t] = 1.0 - s.beta[t];
    prod *= s.alpha[t];
    s.alpha_bar[t] = prod;
  }
  return s;
}

void sin_time_embed(int t, std::size_t dim, double* out) {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("time embedding dim must be even and positive");
  const std::size_t half = dim / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
    const double arg = static_cast<double>(t) * freq;
    out[2 * i] = std::sin(arg);
    out[2 * i + 1] = std::cos(arg);
  }
}

std::vector<double> sin_time_embed(int t, std::size_t dim) {
  std::vector<double> out(dim);
  sin_time_embed(t, dim, out.data());
  return out;
}

}  // namespace tabdiff
