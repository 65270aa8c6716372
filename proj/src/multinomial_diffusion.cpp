#include "tabdiff/multinomial_diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tabdiff {

namespace {

constexpr double kProbFloor = 1e-12;

// Unnormalized posterior factors for one column.
struct PosteriorTerms {
  std::vector<double> u;  // elementwise product of the two mixture terms
  double total = 0.0;
};

PosteriorTerms posterior_terms(std::span<const double> x_t_onehot,
                               std::span<const double> x0_probs, int t,
                               const NoiseSchedule& schedule) {
  const auto k = x_t_onehot.size();
  const double alpha = schedule.alpha_t(t);
  const double abar_prev = schedule.alpha_bar_t(t - 1);
  const double step_mix = (1.0 - alpha) / static_cast<double>(k);
  const double marg_mix = (1.0 - abar_prev) / static_cast<double>(k);

  PosteriorTerms terms;
  terms.u.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double step = alpha * x_t_onehot[i] + step_mix;
    const double marg = abar_prev * x0_probs[i] + marg_mix;
    terms.u[i] = step * marg;
    terms.total += terms.u[i];
  }
  return terms;
}

}  // namespace

void softmax(std::span<const double> logits, std::span<double> out) {
  double max_logit = logits[0];
  for (double v : logits) max_logit = std::max(max_logit, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= sum;
}

void cat_marginal_probs(std::span<const double> x0_onehot, double alpha_bar,
                        std::span<double> out) {
  const double mix = (1.0 - alpha_bar) / static_cast<double>(x0_onehot.size());
  for (std::size_t i = 0; i < x0_onehot.size(); ++i) {
    out[i] = alpha_bar * x0_onehot[i] + mix;
  }
}

std::size_t q_sample_cat(std::span<const double> x0_onehot, int t,
                         const NoiseSchedule& schedule, Rng& rng) {
  std::vector<double> probs(x0_onehot.size());
  cat_marginal_probs(x0_onehot, schedule.alpha_bar_t(t), probs);
  return rng.categorical(probs);
}

void cat_posterior(std::span<const double> x_t_onehot, std::span<const double> x0_probs,
                   int t, const NoiseSchedule& schedule, std::span<double> out) {
  const auto terms = posterior_terms(x_t_onehot, x0_probs, t, schedule);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = terms.u[i] / terms.total;
}

double cat_kl_loss(std::span<const double> x0_onehot, std::span<const double> x_t_onehot,
                   std::span<const double> logits, int t, const NoiseSchedule& schedule) {
  const auto k = x0_onehot.size();
  std::vector<double> x0_hat(k);
  softmax(logits, x0_hat);

  if (t == 1) {
    std::size_t level = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (x0_onehot[i] > 0.5) level = i;
    }
    return -std::log(std::max(x0_hat[level], kProbFloor));
  }

  std::vector<double> q(k), p(k);
  cat_posterior(x_t_onehot, x0_onehot, t, schedule, q);
  cat_posterior(x_t_onehot, x0_hat, t, schedule, p);
  double kl = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    kl += q[i] * (std::log(std::max(q[i], kProbFloor)) - std::log(std::max(p[i], kProbFloor)));
  }
  return kl;
}

double cat_kl_loss_grad(std::span<const double> x0_onehot, std::span<const double> x_t_onehot,
                        std::span<const double> logits, int t, const NoiseSchedule& schedule,
                        std::span<double> d_logits) {
  const auto k = x0_onehot.size();
  std::vector<double> x0_hat(k);
  softmax(logits, x0_hat);

  if (t == 1) {
    std::size_t level = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (x0_onehot[i] > 0.5) level = i;
    }
    for (std::size_t i = 0; i < k; ++i) d_logits[i] = x0_hat[i];
    d_logits[level] -= 1.0;
    return -std::log(std::max(x0_hat[level], kProbFloor));
  }

  std::vector<double> q(k);
  cat_posterior(x_t_onehot, x0_onehot, t, schedule, q);

  const auto terms = posterior_terms(x_t_onehot, x0_hat, t, schedule);
  const double alpha = schedule.alpha_t(t);
  const double abar_prev = schedule.alpha_bar_t(t - 1);
  const double step_mix = (1.0 - alpha) / static_cast<double>(k);

  double kl = 0.0;
  double ratio_dot = 0.0;  // sum_j q_j p_j / max(p_j, floor)
  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = terms.u[i] / terms.total;
    kl += q[i] * (std::log(std::max(q[i], kProbFloor)) - std::log(std::max(p[i], kProbFloor)));
    ratio_dot += q[i] * p[i] / std::max(p[i], kProbFloor);
  }

  // dKL/d(x0_hat_i) through the normalized product, then the softmax.
  std::vector<double> g(k);
  double g_dot_s = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double step = alpha * x_t_onehot[i] + step_mix;
    const double d_u = (ratio_dot - q[i] / std::max(p[i], kProbFloor)) / terms.total;
    g[i] = d_u * step * abar_prev;
    g_dot_s += g[i] * x0_hat[i];
  }
  for (std::size_t i = 0; i < k; ++i) {
    d_logits[i] = x0_hat[i] * (g[i] - g_dot_s);
  }
  return kl;
}

std::size_t p_sample_cat(std::span<const double> x_t_onehot, std::span<const double> logits,
                         int t, const NoiseSchedule& schedule, Rng& rng, bool sample_final) {
  const auto k = logits.size();
  std::vector<double> x0_hat(k);
  softmax(logits, x0_hat);

  if (t == 1 && !sample_final) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i) {
      if (x0_hat[i] > x0_hat[best]) best = i;
    }
    return best;
  }

  std::vector<double> probs(k);
  cat_posterior(x_t_onehot, x0_hat, t, schedule, probs);
  return rng.categorical(probs);
}

}  // namespace tabdiff
