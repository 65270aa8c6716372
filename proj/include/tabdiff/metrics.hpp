#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tabdiff/data_pipeline.hpp"
#include "tabdiff/matrix.hpp"
#include "tabdiff/parallel.hpp"

namespace tabdiff {

// Per-dimension marginal statistics of an encoded matrix: category
// frequencies on one-hot dimensions, means on continuous dimensions.
std::vector<double> dim_stats(const EncodedMatrix& m, Exec exec = Exec::parallel);

// RMSE between the dimension statistics of two matched encodings.
double dimwise_probability_rmse(const EncodedMatrix& real, const EncodedMatrix& synth,
                                Exec exec = Exec::parallel);

struct DimwisePredictionResult {
  double rmse = 0.0;
  std::vector<double> real_f1;   // per evaluated dimension
  std::vector<double> synth_f1;  // per evaluated dimension
  std::vector<std::size_t> dims;          // encoded dimension of each entry
  std::vector<std::size_t> skipped_dims;  // degenerate dimensions
};

// For each encoded dimension d: binarize d (one-hot dims are already
// binary; continuous dims split at the real fit-half median), train one
// logistic regression on real rows and one on synthetic rows, and score
// both by F1 at threshold 0.5 on a held-out half of the real rows. Result
// is the RMSE between the two F1 vectors. Dimensions of the same one-hot
// block are excluded from the feature set of their own block's targets.
DimwisePredictionResult dimwise_prediction_rmse(const EncodedMatrix& real,
                                                const EncodedMatrix& synth,
                                                const EncodingLayout& layout,
                                                std::uint64_t seed,
                                                Exec exec = Exec::parallel);

struct MmdResult {
  double value = 0.0;
  double sigma = 0.0;
  bool degenerate = false;  // all pooled points identical
};

// Biased squared-MMD estimator with an RBF kernel; sigma defaults to the
// median pairwise distance over the pooled sample.
MmdResult mmd_rbf(const Matrix& real, const Matrix& synth,
                  std::optional<double> bandwidth = std::nullopt,
                  Exec exec = Exec::parallel);

// Median over synthetic rows of the Euclidean distance to the closest
// real row, in encoded space.
double dcr(const Matrix& real, const Matrix& synth, Exec exec = Exec::parallel);

struct MirResult {
  double f1 = 0.0;
  double threshold = 0.0;
  bool degenerate = false;  // no positive predictions or no positives scored
};

// Membership inference risk: a record is claimed "member" when its nearest
// synthetic neighbour is closer than the threshold; returns the F1 of that
// attack with members as the positive class. The default threshold is the
// median nearest-synthetic distance over members and non-members pooled.
MirResult mir(const Matrix& members, const Matrix& non_members, const Matrix& synth,
              std::optional<double> threshold = std::nullopt, Exec exec = Exec::parallel);

}  // namespace tabdiff
