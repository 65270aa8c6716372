#pragma once

#include <optional>
#include <vector>

#include "tabdiff/matrix.hpp"
#include "tabdiff/parallel.hpp"

namespace tabdiff::kernels {

// Data-parallel inner loops shared by the evaluation metrics. Each kernel
// computes per-index results into independent slots (or fixed-size chunk
// partials folded in order), so Exec::serial and Exec::parallel are
// bit-identical for any thread count; the serial path doubles as the
// reference implementation in the tests and the benchmark.

// Squared Euclidean distance from each row of `from` to its nearest row
// of `to`.
std::vector<double> nearest_sq_dists(const Matrix& from, const Matrix& to, Exec exec);

// Mean RBF kernel value exp(-d^2 / (2 sigma^2)) over all row pairs (a_i, b_j).
double rbf_mean(const Matrix& a, const Matrix& b, double sigma, Exec exec);

// Median pairwise Euclidean distance over all unordered row pairs of the
// pooled matrix; nullopt when there are no pairs.
std::optional<double> median_pairwise_distance(const Matrix& pooled, Exec exec);

// Per-dimension column means.
std::vector<double> column_means(const Matrix& m, Exec exec);

// Median with the even-count convention (mean of the two central values).
// Mutates its argument.
double median_inplace(std::vector<double>& values);

}  // namespace tabdiff::kernels
