#include "tabdiff/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "tabdiff/errors.hpp"
#include "tabdiff/rng.hpp"

namespace tabdiff {

namespace {

constexpr std::uint64_t kUtilityGenStream = 0x757469ULL;
constexpr std::uint64_t kAugmentGenStream = 0x617567ULL;
constexpr std::uint64_t kFitStream = 0x666974ULL;

// Fit seeds depend on the evaluation seed and classifier only, so
// real-trained scores are independent of the generation seed and the
// augmentation f = 0 rows coincide with the utility baseline.
std::uint64_t fit_seed(std::uint64_t base, std::size_t eval_idx, std::size_t kind_idx) {
  return Rng::mix(Rng::mix(base, kFitStream), eval_idx * 16 + kind_idx);
}

void check_conditional(const GenerativeModel& model, const EncodedMatrix& train,
                       const EncodedMatrix& test) {
  if (!model.conditional()) {
    throw ConfigError("utility and augmentation experiments require a class-conditional model");
  }
  if (train.labels.size() != train.values.rows() || test.labels.size() != test.values.rows()) {
    throw ConfigError("experiment inputs must carry one label per row");
  }
  if (train.values.rows() == 0 || test.values.rows() == 0) {
    throw ConfigError("experiment inputs must be nonempty");
  }
}

}  // namespace

UtilityResult utility_experiment(const EncodedMatrix& real_train,
                                 const EncodedMatrix& real_test,
                                 const GenerativeModel& model, const ExperimentConfig& config) {
  check_conditional(model, real_train, real_test);
  const std::size_t n_synth = real_train.values.rows();

  UtilityResult result;
  result.synth_rows_per_seed = n_synth;

  // Real-trained scores per (eval seed, classifier); shared across
  // generation seeds.
  std::vector<Scores> real_scores(config.n_eval_seeds * kAllClassifierKinds.size());
  for_each_index(real_scores.size(), config.exec, [&](std::size_t i) {
    const std::size_t e = i / kAllClassifierKinds.size();
    const std::size_t k = i % kAllClassifierKinds.size();
    const auto clf = fit_classifier(kAllClassifierKinds[k], real_train.values, real_train.labels,
                                    fit_seed(config.base_seed, e, k));
    real_scores[i] = score(real_test.labels, clf->predict_proba(real_test.values));
  });

  for (std::size_t g = 0; g < config.n_gen_seeds; ++g) {
    const auto synth = generate_encoded(
        model, n_synth, /*balanced=*/false,
        Rng::mix(Rng::mix(config.base_seed, kUtilityGenStream), g), config.exec);

    std::vector<UtilityCell> cells(config.n_eval_seeds * kAllClassifierKinds.size());
    for_each_index(cells.size(), config.exec, [&](std::size_t i) {
      const std::size_t e = i / kAllClassifierKinds.size();
      const std::size_t k = i % kAllClassifierKinds.size();
      const auto clf = fit_classifier(kAllClassifierKinds[k], synth.values, synth.labels,
                                      fit_seed(config.base_seed, e, k));
      UtilityCell cell;
      cell.kind = kAllClassifierKinds[k];
      cell.gen_seed_index = g;
      cell.eval_seed_index = e;
      cell.real = real_scores[i];
      cell.synth = score(real_test.labels, clf->predict_proba(real_test.values));
      cells[i] = cell;
    });
    result.cells.insert(result.cells.end(), cells.begin(), cells.end());
  }
  return result;
}

AugmentationResult augmentation_experiment(const EncodedMatrix& real_train,
                                           const EncodedMatrix& real_test,
                                           const GenerativeModel& model,
                                           const std::vector<double>& fractions,
                                           const ExperimentConfig& config) {
  check_conditional(model, real_train, real_test);
  const std::size_t n_train = real_train.values.rows();

  std::size_t max_rows = 0;
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("augmentation fractions must be nonnegative");
    max_rows = std::max(max_rows,
                        static_cast<std::size_t>(std::llround(f * static_cast<double>(n_train))));
  }

  AugmentationResult result;
  for (std::size_t g = 0; g < config.n_gen_seeds; ++g) {
    // One balanced block per generation seed; a prefix of m rows equals a
    // standalone balanced draw of m rows under the same seed because rows
    // own derived streams and balanced labels are assigned round-robin.
    EncodedMatrix synth;
    if (max_rows > 0) {
      synth = generate_encoded(model, max_rows, /*balanced=*/true,
                               Rng::mix(Rng::mix(config.base_seed, kAugmentGenStream), g),
                               config.exec);
    }

    std::vector<AugmentationCell> cells(fractions.size() * config.n_eval_seeds *
                                        kAllClassifierKinds.size());
    for_each_index(cells.size(), config.exec, [&](std::size_t i) {
      const std::size_t per_f = config.n_eval_seeds * kAllClassifierKinds.size();
      const std::size_t fi = i / per_f;
      const std::size_t e = (i % per_f) / kAllClassifierKinds.size();
      const std::size_t k = i % kAllClassifierKinds.size();
      const auto m =
          static_cast<std::size_t>(std::llround(fractions[fi] * static_cast<double>(n_train)));

      Matrix x(n_train + m, real_train.values.cols());
      std::vector<int> y(n_train + m);
      for (std::size_t r = 0; r < n_train; ++r) {
        const auto src = real_train.values.row(r);
        std::copy(src.begin(), src.end(), x.row(r).begin());
        y[r] = real_train.labels[r];
      }
      for (std::size_t r = 0; r < m; ++r) {
        const auto src = synth.values.row(r);
        std::copy(src.begin(), src.end(), x.row(n_train + r).begin());
        y[n_train + r] = synth.labels[r];
      }

      const auto clf = fit_classifier(kAllClassifierKinds[k], x, y,
                                      fit_seed(config.base_seed, e, k));
      AugmentationCell cell;
      cell.kind = kAllClassifierKinds[k];
      cell.gen_seed_index = g;
      cell.eval_seed_index = e;
      cell.fraction = fractions[fi];
      cell.f1 = score(real_test.labels, clf->predict_proba(real_test.values)).f1;
      cells[i] = cell;
    });
    result.cells.insert(result.cells.end(), cells.begin(), cells.end());
  }
  return result;
}

}  // namespace tabdiff
