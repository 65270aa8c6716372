// Compares the serial reference path of every data-parallel kernel against
// the OpenMP path, checking bitwise agreement and reporting the speedup.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "tabdiff/data_pipeline.hpp"
#include "tabdiff/kernels.hpp"
#include "tabdiff/matrix.hpp"
#include "tabdiff/parallel.hpp"
#include "tabdiff/rng.hpp"
#include "tabdiff/toy_data.hpp"
#include "tabdiff/training.hpp"

namespace {

using tabdiff::Exec;
using tabdiff::Matrix;

double time_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  tabdiff::Rng rng(seed);
  for (double& v : m.values()) v = rng.uniform();
  return m;
}

int failures = 0;

void report(const std::string& name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx  %s\n", name.c_str(), serial_ms, parallel_ms,
              serial_ms / parallel_ms, equal ? "bitwise-equal" : "MISMATCH");
  if (!equal) ++failures;
}

}  // namespace

int main() {
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");
  std::printf("(threads available: %d)\n", tabdiff::max_threads());

  {
    const Matrix synth = random_matrix(2000, 16, 1);
    const Matrix real = random_matrix(2000, 16, 2);
    std::vector<double> serial_out, parallel_out;
    const double s = time_ms(
        [&] { serial_out = tabdiff::kernels::nearest_sq_dists(synth, real, Exec::serial); }, 3);
    const double p = time_ms(
        [&] { parallel_out = tabdiff::kernels::nearest_sq_dists(synth, real, Exec::parallel); },
        3);
    report("nearest_sq_dists 2000x2000", s, p, serial_out == parallel_out);
  }

  {
    const Matrix a = random_matrix(1500, 16, 3);
    const Matrix b = random_matrix(1500, 16, 4);
    double serial_out = 0.0, parallel_out = 0.0;
    const double s =
        time_ms([&] { serial_out = tabdiff::kernels::rbf_mean(a, b, 1.0, Exec::serial); }, 3);
    const double p =
        time_ms([&] { parallel_out = tabdiff::kernels::rbf_mean(a, b, 1.0, Exec::parallel); }, 3);
    report("rbf_mean 1500x1500", s, p, serial_out == parallel_out);
  }

  {
    const Matrix pooled = random_matrix(2000, 16, 5);
    double serial_out = 0.0, parallel_out = 0.0;
    const double s = time_ms(
        [&] {
          serial_out = *tabdiff::kernels::median_pairwise_distance(pooled, Exec::serial);
        },
        3);
    const double p = time_ms(
        [&] {
          parallel_out = *tabdiff::kernels::median_pairwise_distance(pooled, Exec::parallel);
        },
        3);
    report("median_pairwise 2000", s, p, serial_out == parallel_out);
  }

  // Training-step and sampling kernels on the bundled toy distribution.
  const auto toy = tabdiff::make_toy_dataset({tabdiff::ToyKind::mixed, 512, 0.5, 0});
  auto [encoded, fitted] = tabdiff::fit_transform(toy.table, toy.schema);
  const auto layout = tabdiff::make_layout(fitted);

  tabdiff::TrainConfig config;
  config.epochs = 1;
  config.batch_size = 256;
  config.timesteps = 100;
  config.seed = 0;
  const auto trained = tabdiff::train(encoded, fitted, config, Exec::serial);

  {
    Matrix x0(256, layout.width);
    std::vector<int> labels(256);
    for (std::size_t r = 0; r < 256; ++r) {
      const auto src = encoded.values.row(r);
      std::copy(src.begin(), src.end(), x0.row(r).begin());
      labels[r] = encoded.labels[r];
    }
    tabdiff::Rng rng(7);
    const auto batch = corrupt_batch(x0, labels, layout, trained.model.schedule, rng);

    auto grads_s = tabdiff::zeros_like(trained.model.params);
    auto grads_p = tabdiff::zeros_like(trained.model.params);
    double loss_s = 0.0, loss_p = 0.0;
    const double s = time_ms(
        [&] {
          tabdiff::zero_tensors(grads_s);
          loss_s = tabdiff::batch_loss_and_grads(trained.model.params, trained.model.schedule,
                                                 layout, batch, grads_s, Exec::serial);
        },
        3);
    const double p = time_ms(
        [&] {
          tabdiff::zero_tensors(grads_p);
          loss_p = tabdiff::batch_loss_and_grads(trained.model.params, trained.model.schedule,
                                                 layout, batch, grads_p, Exec::parallel);
        },
        3);
    bool equal = loss_s == loss_p;
    auto rs = tensor_refs(grads_s);
    auto rp = tensor_refs(grads_p);
    for (std::size_t i = 0; i < rs.size(); ++i) equal = equal && (*rs[i].data == *rp[i].data);
    report("batch_loss_and_grads 256", s, p, equal);
  }

  {
    tabdiff::EncodedMatrix out_s, out_p;
    const double s = time_ms(
        [&] { out_s = tabdiff::generate_encoded(trained.model, 256, false, 11, Exec::serial); },
        3);
    const double p = time_ms(
        [&] { out_p = tabdiff::generate_encoded(trained.model, 256, false, 11, Exec::parallel); },
        3);
    report("generate_encoded 256", s, p,
           out_s.values == out_p.values && out_s.labels == out_p.labels);
  }

  return failures == 0 ? 0 : 1;
}
