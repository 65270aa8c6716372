#include "tabdiff/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tabdiff::kernels {

namespace {

constexpr std::size_t kChunk = 64;

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

std::vector<double> nearest_sq_dists(const Matrix& from, const Matrix& to, Exec exec) {
  if (from.cols() != to.cols()) throw std::invalid_argument("nearest_sq_dists: width mismatch");
  std::vector<double> out(from.rows());
  for_each_index(from.rows(), exec, [&](std::size_t i) {
    const auto row = from.row(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < to.rows(); ++j) {
      best = std::min(best, sq_dist(row, to.row(j)));
    }
    out[i] = best;
  });
  return out;
}

double rbf_mean(const Matrix& a, const Matrix& b, double sigma, Exec exec) {
  if (a.cols() != b.cols()) throw std::invalid_argument("rbf_mean: width mismatch");
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("rbf_mean: empty input");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const double total = chunked_sum(a.rows(), kChunk, exec, [&](std::size_t begin, std::size_t end) {
    double partial = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = a.row(i);
      for (std::size_t j = 0; j < b.rows(); ++j) {
        partial += std::exp(-sq_dist(row, b.row(j)) * inv);
      }
    }
    return partial;
  });
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

std::optional<double> median_pairwise_distance(const Matrix& pooled, Exec exec) {
  const std::size_t n = pooled.rows();
  if (n < 2) return std::nullopt;
  const std::size_t n_pairs = n * (n - 1) / 2;
  std::vector<double> dists(n_pairs);
  // Pair (i, j>i) stored at offset(i) + j - i - 1; rows are independent.
  for_each_index(n - 1, exec, [&](std::size_t i) {
    std::size_t offset = i * n - i * (i + 1) / 2 - i;
    const auto row = pooled.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      dists[offset + j - 1] = std::sqrt(sq_dist(row, pooled.row(j)));
    }
  });
  return median_inplace(dists);
}

std::vector<double> column_means(const Matrix& m, Exec exec) {
  if (m.rows() == 0) throw std::invalid_argument("column_means: empty matrix");
  std::vector<double> out(m.cols());
  for_each_index(m.cols(), exec, [&](std::size_t c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) acc += m(r, c);
    out[c] = acc / static_cast<double>(m.rows());
  });
  return out;
}

double median_inplace(std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("median of empty vector");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace tabdiff::kernels
