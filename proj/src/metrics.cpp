#include "tabdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabdiff/classifiers.hpp"
#include "tabdiff/errors.hpp"
#include "tabdiff/kernels.hpp"
#include "tabdiff/rng.hpp"

namespace tabdiff {

std::vector<double> dim_stats(const EncodedMatrix& m, Exec exec) {
  if (m.values.rows() == 0) throw ConfigError("dim_stats: empty matrix");
  return kernels::column_means(m.values, exec);
}

double dimwise_probability_rmse(const EncodedMatrix& real, const EncodedMatrix& synth,
                                Exec exec) {
  if (real.values.cols() != synth.values.cols()) {
    throw ConfigError("dimension-wise probability: encoding widths differ");
  }
  const auto a = dim_stats(real, exec);
  const auto b = dim_stats(synth, exec);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(a.size()));
}

namespace {

// Feature view of an encoded matrix with some dimensions removed.
Matrix drop_dims(const Matrix& m, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& keep) {
  Matrix out(rows.size(), keep.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j) out(i, j) = m(rows[i], keep[j]);
  }
  return out;
}

bool two_classes(const std::vector<int>& y) {
  bool has0 = false, has1 = false;
  for (int v : y) (v == 1 ? has1 : has0) = true;
  return has0 && has1;
}

}  // namespace

DimwisePredictionResult dimwise_prediction_rmse(const EncodedMatrix& real,
                                                const EncodedMatrix& synth,
                                                const EncodingLayout& layout,
                                                std::uint64_t seed, Exec exec) {
  const std::size_t width = real.values.cols();
  if (width != synth.values.cols()) {
    throw ConfigError("dimension-wise prediction: encoding widths differ");
  }
  if (width < 2) throw ConfigError("dimension-wise prediction needs at least 2 dimensions");
  const std::size_t n_real = real.values.rows();
  if (n_real < 4 || synth.values.rows() == 0) {
    throw ConfigError("dimension-wise prediction: too few rows");
  }

  // Both sides use the same protocol: fit on a shuffled half, evaluate on
  // the held-out half of the real rows. Identical inputs under the same
  // seed therefore produce identical classifiers.
  const auto shuffled = [&](std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_int(i + 1);
      std::swap(order[i], order[j]);
    }
    return order;
  };
  const auto real_order = shuffled(n_real);
  const std::size_t n_fit = n_real / 2;
  const std::vector<std::size_t> fit_rows(real_order.begin(), real_order.begin() + n_fit);
  const std::vector<std::size_t> eval_rows(real_order.begin() + n_fit, real_order.end());
  auto synth_rows = shuffled(synth.values.rows());
  synth_rows.resize(std::max<std::size_t>(1, synth.values.rows() / 2));

  // Siblings of a one-hot dimension determine it through the block-sum
  // constraint, so the whole block is excluded from its own feature set.
  std::vector<std::pair<std::size_t, std::size_t>> excluded_range(width);
  for (std::size_t d = 0; d < width; ++d) excluded_range[d] = {d, d + 1};
  for (const auto& block : layout.cat_blocks) {
    for (std::size_t k = 0; k < block.cardinality; ++k) {
      excluded_range[block.offset + k] = {block.offset, block.offset + block.cardinality};
    }
  }

  // Binarization thresholds for continuous dimensions: real fit-half median.
  std::vector<double> thresholds(width, 0.5);
  for (std::size_t slot = 0; slot < layout.n_cont; ++slot) {
    std::vector<double> vals(fit_rows.size());
    for (std::size_t i = 0; i < fit_rows.size(); ++i) vals[i] = real.values(fit_rows[i], slot);
    thresholds[slot] = kernels::median_inplace(vals);
  }

  auto binarize = [&](const Matrix& m, const std::vector<std::size_t>& rows, std::size_t d) {
    std::vector<int> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      y[i] = m(rows[i], d) > thresholds[d] ? 1 : 0;
    }
    return y;
  };

  struct DimOutcome {
    bool skipped = true;
    double real_f1 = 0.0;
    double synth_f1 = 0.0;
  };
  std::vector<DimOutcome> outcomes(width);

  for_each_index(width, exec, [&](std::size_t d) {
    const auto y_fit = binarize(real.values, fit_rows, d);
    const auto y_eval = binarize(real.values, eval_rows, d);
    if (!two_classes(y_fit) || !two_classes(y_eval)) return;  // degenerate dimension

    std::vector<std::size_t> keep;
    keep.reserve(width);
    for (std::size_t j = 0; j < width; ++j) {
      if (j < excluded_range[d].first || j >= excluded_range[d].second) keep.push_back(j);
    }

    const Matrix x_fit = drop_dims(real.values, fit_rows, keep);
    const Matrix x_eval = drop_dims(real.values, eval_rows, keep);
    const Matrix x_synth = drop_dims(synth.values, synth_rows, keep);
    const auto y_synth = binarize(synth.values, synth_rows, d);

    const auto real_clf =
        fit_classifier(ClassifierKind::logistic_regression, x_fit, y_fit, seed);
    const double real_f1 = score(y_eval, real_clf->predict_proba(x_eval)).f1;

    double synth_f1 = 0.0;
    if (two_classes(y_synth)) {
      const auto synth_clf =
          fit_classifier(ClassifierKind::logistic_regression, x_synth, y_synth, seed);
      synth_f1 = score(y_eval, synth_clf->predict_proba(x_eval)).f1;
    } else {
      // Constant synthetic column: the classifier degenerates to the
      // constant prediction.
      const double constant = y_synth.empty() ? 0.0 : static_cast<double>(y_synth.front());
      const std::vector<double> probs(y_eval.size(), constant);
      synth_f1 = score(y_eval, probs).f1;
    }
    outcomes[d] = {false, real_f1, synth_f1};
  });

  DimwisePredictionResult result;
  double sq = 0.0;
  for (std::size_t d = 0; d < width; ++d) {
    if (outcomes[d].skipped) {
      result.skipped_dims.push_back(d);
      continue;
    }
    result.dims.push_back(d);
    result.real_f1.push_back(outcomes[d].real_f1);
    result.synth_f1.push_back(outcomes[d].synth_f1);
    const double diff = outcomes[d].real_f1 - outcomes[d].synth_f1;
    sq += diff * diff;
  }
  if (result.dims.empty()) {
    throw NumericError("dimension-wise prediction: every dimension was degenerate");
  }
  result.rmse = std::sqrt(sq / static_cast<double>(result.dims.size()));
  return result;
}

MmdResult mmd_rbf(const Matrix& real, const Matrix& synth, std::optional<double> bandwidth,
                  Exec exec) {
  if (real.rows() == 0 || synth.rows() == 0) throw ConfigError("mmd_rbf: empty input");
  if (real.cols() != synth.cols()) throw ConfigError("mmd_rbf: widths differ");

  MmdResult result;
  if (bandwidth) {
    result.sigma = *bandwidth;
  } else {
    Matrix pooled(real.rows() + synth.rows(), real.cols());
    for (std::size_t r = 0; r < real.rows(); ++r) {
      std::copy(real.row(r).begin(), real.row(r).end(), pooled.row(r).begin());
    }
    for (std::size_t r = 0; r < synth.rows(); ++r) {
      std::copy(synth.row(r).begin(), synth.row(r).end(), pooled.row(real.rows() + r).begin());
    }
    const auto med = kernels::median_pairwise_distance(pooled, exec);
    result.sigma = med.value_or(0.0);
  }
  if (result.sigma <= 0.0) {
    // All pooled points identical; the two samples coincide.
    result.degenerate = true;
    result.value = 0.0;
    return result;
  }

  const double kxx = kernels::rbf_mean(real, real, result.sigma, exec);
  const double kyy = kernels::rbf_mean(synth, synth, result.sigma, exec);
  const double kxy = kernels::rbf_mean(real, synth, result.sigma, exec);
  result.value = kxx + kyy - 2.0 * kxy;
  return result;
}

double dcr(const Matrix& real, const Matrix& synth, Exec exec) {
  if (real.rows() == 0 || synth.rows() == 0) throw ConfigError("dcr: empty input");
  auto sq = kernels::nearest_sq_dists(synth, real, exec);
  for (double& v : sq) v = std::sqrt(v);
  return kernels::median_inplace(sq);
}

MirResult mir(const Matrix& members, const Matrix& non_members, const Matrix& synth,
              std::optional<double> threshold, Exec exec) {
  if (members.rows() == 0 || non_members.rows() == 0 || synth.rows() == 0) {
    throw ConfigError("mir: empty input");
  }
  auto member_d = kernels::nearest_sq_dists(members, synth, exec);
  auto non_member_d = kernels::nearest_sq_dists(non_members, synth, exec);
  for (double& v : member_d) v = std::sqrt(v);
  for (double& v : non_member_d) v = std::sqrt(v);

  MirResult result;
  if (threshold) {
    result.threshold = *threshold;
  } else {
    std::vector<double> pooled = member_d;
    pooled.insert(pooled.end(), non_member_d.begin(), non_member_d.end());
    result.threshold = kernels::median_inplace(pooled);
  }

  std::size_t tp = 0, fp = 0, fn = 0;
  for (double d : member_d) {
    if (d < result.threshold) ++tp;
    else ++fn;
  }
  for (double d : non_member_d) {
    if (d < result.threshold) ++fp;
  }
  if (tp + fp == 0 || tp + fn == 0) result.degenerate = true;
  const double denom = static_cast<double>(2 * tp + fp + fn);
  result.f1 = denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  return result;
}

}  // namespace tabdiff
