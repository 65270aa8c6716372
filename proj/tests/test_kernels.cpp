#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tabdiff/kernels.hpp"
#include "tabdiff/rng.hpp"
#include "tabdiff/toy_data.hpp"
#include "tabdiff/training.hpp"

using namespace tabdiff;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  Rng rng(seed);
  for (double& v : m.values()) v = rng.uniform();
  return m;
}

double naive_sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("nearest_sq_dists agrees with brute force and across exec modes") {
  const auto from = random_matrix(37, 5, 1);
  const auto to = random_matrix(23, 5, 2);
  const auto serial = kernels::nearest_sq_dists(from, to, Exec::serial);
  const auto parallel = kernels::nearest_sq_dists(from, to, Exec::parallel);
  CHECK(serial == parallel);

  for (std::size_t i = 0; i < from.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < to.rows(); ++j) {
      best = std::min(best, naive_sq_dist(from.row(i), to.row(j)));
    }
    CHECK(serial[i] == best);
  }
}

TEST_CASE("rbf_mean agrees with a direct double loop and across exec modes") {
  const auto a = random_matrix(19, 4, 3);
  const auto b = random_matrix(31, 4, 4);
  const double sigma = 0.7;
  const double serial = kernels::rbf_mean(a, b, sigma, Exec::serial);
  const double parallel = kernels::rbf_mean(a, b, sigma, Exec::parallel);
  CHECK(serial == parallel);

  double expected = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      expected += std::exp(-naive_sq_dist(a.row(i), b.row(j)) / (2.0 * sigma * sigma));
    }
  }
  expected /= static_cast<double>(a.rows() * b.rows());
  CHECK(serial == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("median_pairwise_distance agrees with a sorted oracle") {
  const auto pooled = random_matrix(41, 3, 5);
  std::vector<double> dists;
  for (std::size_t i = 0; i < pooled.rows(); ++i) {
    for (std::size_t j = i + 1; j < pooled.rows(); ++j) {
      dists.push_back(std::sqrt(naive_sq_dist(pooled.row(i), pooled.row(j))));
    }
  }
  std::sort(dists.begin(), dists.end());
  const double expected = dists.size() % 2 == 1
                              ? dists[dists.size() / 2]
                              : 0.5 * (dists[dists.size() / 2 - 1] + dists[dists.size() / 2]);

  const auto serial = kernels::median_pairwise_distance(pooled, Exec::serial);
  const auto parallel = kernels::median_pairwise_distance(pooled, Exec::parallel);
  REQUIRE(serial.has_value());
  CHECK(*serial == *parallel);
  CHECK(*serial == doctest::Approx(expected).epsilon(1e-12));

  const Matrix single(1, 3, 0.0);
  CHECK(!kernels::median_pairwise_distance(single, Exec::serial).has_value());
}

TEST_CASE("column_means agrees with a direct loop") {
  const auto m = random_matrix(29, 6, 6);
  const auto serial = kernels::column_means(m, Exec::serial);
  const auto parallel = kernels::column_means(m, Exec::parallel);
  CHECK(serial == parallel);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) acc += m(r, c);
    CHECK(serial[c] == doctest::Approx(acc / 29.0).epsilon(1e-12));
  }
}

TEST_CASE("median_inplace uses the even-count convention") {
  std::vector<double> odd = {9.0, 1.0, 2.0};
  CHECK(kernels::median_inplace(odd) == 2.0);
  std::vector<double> even = {3.0, 1.0};
  CHECK(kernels::median_inplace(even) == 2.0);
  std::vector<double> one = {5.0};
  CHECK(kernels::median_inplace(one) == 5.0);
}

TEST_CASE("chunked_sum folds identically for both exec modes") {
  std::vector<double> values(1003);
  Rng rng(7);
  for (double& v : values) v = rng.normal();
  auto partial = [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = b; i < e; ++i) acc += values[i];
    return acc;
  };
  const double serial = chunked_sum(values.size(), 64, Exec::serial, partial);
  const double parallel = chunked_sum(values.size(), 64, Exec::parallel, partial);
  CHECK(serial == parallel);
}

TEST_CASE("training and sampling kernels are bitwise thread-invariant") {
  const auto toy = make_toy_dataset({ToyKind::mixed, 300, 0.5, 0});
  auto [encoded, fitted] = fit_transform(toy.table, toy.schema);
  const auto layout = make_layout(fitted);

  TrainConfig config;
  config.epochs = 2;
  config.batch_size = 128;
  config.timesteps = 30;
  config.hidden_dims = {16, 16};
  config.embed_dim = 8;
  config.seed = 0;

  const auto serial = train(encoded, fitted, config, Exec::serial);
  const auto parallel = train(encoded, fitted, config, Exec::parallel);
  CHECK(model_to_json_string(serial.model) == model_to_json_string(parallel.model));
  CHECK(serial.loss_trace == parallel.loss_trace);

  const auto gen_serial = generate_encoded(serial.model, 64, true, 5, Exec::serial);
  const auto gen_parallel = generate_encoded(parallel.model, 64, true, 5, Exec::parallel);
  CHECK(gen_serial.values == gen_parallel.values);
  CHECK(gen_serial.labels == gen_parallel.labels);
}

TEST_SUITE_END();
