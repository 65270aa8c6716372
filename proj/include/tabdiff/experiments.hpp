#pragma once

#include <cstdint>
#include <vector>

#include "tabdiff/classifiers.hpp"
#include "tabdiff/parallel.hpp"
#include "tabdiff/training.hpp"

namespace tabdiff {

struct ExperimentConfig {
  std::size_t n_gen_seeds = 5;
  std::size_t n_eval_seeds = 3;
  std::uint64_t base_seed = 0;
  Exec exec = Exec::parallel;
};

struct UtilityCell {
  ClassifierKind kind;
  std::size_t gen_seed_index;
  std::size_t eval_seed_index;
  Scores real;
  Scores synth;
};

struct UtilityResult {
  std::vector<UtilityCell> cells;
  std::size_t synth_rows_per_seed = 0;
};

// Train-on-synthetic-test-on-real: per generation seed, |real_train|
// synthetic rows are drawn with labels from the empirical class prior;
// every classifier kind is fitted on the real and the synthetic training
// set under a shared fit seed and scored on the real test split.
UtilityResult utility_experiment(const EncodedMatrix& real_train,
                                 const EncodedMatrix& real_test,
                                 const GenerativeModel& model, const ExperimentConfig& config);

struct AugmentationCell {
  ClassifierKind kind;
  std::size_t gen_seed_index;
  std::size_t eval_seed_index;
  double fraction;
  double f1;
};

struct AugmentationResult {
  std::vector<AugmentationCell> cells;
};

// Appends round(f * |real_train|) class-balanced synthetic rows to the
// full real training set for each fraction f and reports the test-set F1.
// Fit seeds match utility_experiment's, so the f = 0 rows reproduce the
// real-trained utility baseline.
AugmentationResult augmentation_experiment(const EncodedMatrix& real_train,
                                           const EncodedMatrix& real_test,
                                           const GenerativeModel& model,
                                           const std::vector<double>& fractions,
                                           const ExperimentConfig& config);

inline const std::vector<double> kDefaultFractions = {0.0, 0.25, 0.5, 0.75, 1.0};

}  // namespace tabdiff
