#pragma once

#include <span>

#include "tabdiff/matrix.hpp"
#include "tabdiff/noise_schedule.hpp"

namespace tabdiff {

// Closed-form forward marginal: x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps.
void q_sample_gauss(std::span<const double> x0, int t, std::span<const double> eps,
                    const NoiseSchedule& schedule, std::span<double> out);

// Batch mean of the per-row mean squared error between the injected and
// predicted noise.
double gauss_loss(const Matrix& eps, const Matrix& eps_hat);

// One reverse step. mu = (x_t - beta_t/sqrt(1-abar_t) * eps_hat)/sqrt(alpha_t);
// sigma_t^2 is the posterior variance beta_t(1-abar_{t-1})/(1-abar_t), which
// vanishes at t = 1, so the final step is noiseless.
void p_sample_gauss(std::span<const double> x_t, int t, std::span<const double> eps_hat,
                    const NoiseSchedule& schedule, std::span<const double> z,
                    std::span<double> out);

double posterior_variance(int t, const NoiseSchedule& schedule);

// Mean of q(x_{t-1} | x_t, x0).
void gauss_posterior_mean(std::span<const double> x0, std::span<const double> x_t, int t,
                          const NoiseSchedule& schedule, std::span<double> out);

// Per-step KL between the true posterior and the model transition with the
// variance fixed to the posterior variance; zero when eps_hat recovers the
// posterior mean.
double gauss_step_kl(std::span<const double> x0, std::span<const double> x_t,
                     std::span<const double> eps_hat, int t, const NoiseSchedule& schedule);

// Diagnostic prior-matching term: KL between the t = T forward marginal of
// x0 and the standard normal prior. Constant in the model parameters.
double gauss_prior_kl(std::span<const double> x0, const NoiseSchedule& schedule);

}  // namespace tabdiff
