#pragma once

#include <string>
#include <vector>

namespace tabdiff {

enum class ScheduleKind { linear, cosine };

ScheduleKind schedule_kind_from_string(const std::string& s);
std::string to_string(ScheduleKind kind);

// Variance schedule and its derived quantities. Transitions are indexed
// t in [1, T]; t = 0 denotes clean data, with alpha_bar(0) == 1.
struct NoiseSchedule {
  int timesteps = 0;
  ScheduleKind kind = ScheduleKind::linear;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::vector<double> beta;       // beta[t-1] is the step-t rate
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // cumulative product of alpha

  double beta_t(int t) const { return beta[static_cast<std::size_t>(t) - 1]; }
  double alpha_t(int t) const { return alpha[static_cast<std::size_t>(t) - 1]; }
  double alpha_bar_t(int t) const {
    return t == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t) - 1];
  }
};

NoiseSchedule make_schedule(int timesteps, ScheduleKind kind, double beta_start,
                            double beta_end);

// Sinusoidal timestep embedding: entry 2i = sin(t * w_i), entry
// 2i+1 = cos(t * w_i), w_i = 10000^(-2i/dim). dim must be even.
std::vector<double> sin_time_embed(int t, std::size_t dim);
void sin_time_embed(int t, std::size_t dim, double* out);

}  // namespace tabdiff
