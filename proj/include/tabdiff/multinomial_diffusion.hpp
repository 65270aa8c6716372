#pragma once

#include <cstddef>
#include <span>

#include "tabdiff/noise_schedule.hpp"
#include "tabdiff/rng.hpp"

namespace tabdiff {

void softmax(std::span<const double> logits, std::span<double> out);

// t-step forward marginal Cat(abar * x0 + (1-abar)/K).
void cat_marginal_probs(std::span<const double> x0_onehot, double alpha_bar,
                        std::span<double> out);

// Draws a level from the t-step marginal of the uniform-resampling kernel.
std::size_t q_sample_cat(std::span<const double> x0_onehot, int t,
                         const NoiseSchedule& schedule, Rng& rng);

// Posterior of one forward step given a distribution over the clean state:
// normalize([alpha_t x_t + (1-alpha_t)/K] * [abar_{t-1} x0 + (1-abar_{t-1})/K]).
void cat_posterior(std::span<const double> x_t_onehot, std::span<const double> x0_probs,
                   int t, const NoiseSchedule& schedule, std::span<double> out);

// Per-column training term: KL between posteriors under the true and the
// predicted clean state for t > 1, negative log-likelihood of the true
// level under softmax(logits) at t = 1.
double cat_kl_loss(std::span<const double> x0_onehot, std::span<const double> x_t_onehot,
                   std::span<const double> logits, int t, const NoiseSchedule& schedule);

// Same value, plus its gradient with respect to the logits.
double cat_kl_loss_grad(std::span<const double> x0_onehot, std::span<const double> x_t_onehot,
                        std::span<const double> logits, int t, const NoiseSchedule& schedule,
                        std::span<double> d_logits);

// One reverse step: sample from the posterior built on softmax(logits).
// The final step decodes by argmax unless sample_final is set.
std::size_t p_sample_cat(std::span<const double> x_t_onehot, std::span<const double> logits,
                         int t, const NoiseSchedule& schedule, Rng& rng,
                         bool sample_final = false);

inline void write_onehot(std::size_t level, std::span<double> out) {
  for (double& v : out) v = 0.0;
  out[level] = 1.0;
}

}  // namespace tabdiff
