#include "tabdiff/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabdiff/errors.hpp"
#include "tabdiff/rng.hpp"

namespace tabdiff {

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::logistic_regression: return "logistic_regression";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::decision_tree: return "decision_tree";
    case ClassifierKind::mlp: return "mlp";
  }
  return "unknown";
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_two_classes(const std::vector<int>& y) {
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw ConfigError("classifier labels must be 0 or 1");
  }
  if (!has0 || !has1) throw ConfigError("classifier fit requires both classes present");
}

// ---------------------------------------------------------------------
// Logistic regression, full-batch gradient descent
// ---------------------------------------------------------------------

class LogisticRegression : public Classifier {
 public:
  void fit(const Matrix& x, const std::vector<int>& y) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    weights_.assign(d, 0.0);
    bias_ = 0.0;

    // Step size below 2/L with L = max row smoothness of the log-loss.
    double max_sq = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double sq = 1.0;  // bias term
      for (double v : x.row(r)) sq += v * v;
      max_sq = std::max(max_sq, sq);
    }
    const double lr = 1.0 / (0.25 * max_sq + 1e-12);

    std::vector<double> gw(d);
    for (int iter = 0; iter < kIters; ++iter) {
      std::fill(gw.begin(), gw.end(), 0.0);
      double gb = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const auto row = x.row(r);
        double z = bias_;
        for (std::size_t j = 0; j < d; ++j) z += weights_[j] * row[j];
        const double err = sigmoid(z) - static_cast<double>(y[r]);
        for (std::size_t j = 0; j < d; ++j) gw[j] += err * row[j];
        gb += err;
      }
      for (std::size_t j = 0; j < d; ++j) weights_[j] -= lr * gw[j] / static_cast<double>(n);
      bias_ -= lr * gb / static_cast<double>(n);
    }
  }

  std::vector<double> predict_proba(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto row = x.row(r);
      double z = bias_;
      for (std::size_t j = 0; j < row.size(); ++j) z += weights_[j] * row[j];
      out[r] = sigmoid(z);
    }
    return out;
  }

 private:
  static constexpr int kIters = 600;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

// ---------------------------------------------------------------------
// k-nearest neighbours (k = 5, vote fraction)
// ---------------------------------------------------------------------

class KnnClassifier : public Classifier {
 public:
  void fit(const Matrix& x, const std::vector<int>& y) {
    train_ = x;
    labels_ = y;
    k_ = std::min<std::size_t>(5, x.rows());
  }

  std::vector<double> predict_proba(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    std::vector<std::pair<double, std::size_t>> dists(train_.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto row = x.row(r);
      for (std::size_t j = 0; j < train_.rows(); ++j) {
        const auto other = train_.row(j);
        double sq = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) {
          const double diff = row[c] - other[c];
          sq += diff * diff;
        }
        dists[j] = {sq, j};
      }
      // Tie-break on index so neighbour sets are reproducible.
      std::partial_sort(dists.begin(), dists.begin() + k_, dists.end());
      double votes = 0.0;
      for (std::size_t j = 0; j < k_; ++j) votes += labels_[dists[j].second];
      out[r] = votes / static_cast<double>(k_);
    }
    return out;
  }

 private:
  Matrix train_;
  std::vector<int> labels_;
  std::size_t k_ = 5;
};

// ---------------------------------------------------------------------
// CART decision tree (Gini, max depth 5)
// ---------------------------------------------------------------------

class DecisionTree : public Classifier {
 public:
  void fit(const Matrix& x, const std::vector<int>& y) {
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    build(x, y, rows, 0);
  }

  std::vector<double> predict_proba(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      int node = 0;
      while (nodes_[node].feature >= 0) {
        node = x(r, nodes_[node].feature) <= nodes_[node].threshold ? nodes_[node].left
                                                                    : nodes_[node].right;
      }
      out[r] = nodes_[node].prob;
    }
    return out;
  }

 private:
  static constexpr int kMaxDepth = 5;

  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double prob = 0.0;
  };

  static double gini(double pos, double count) {
    if (count == 0.0) return 0.0;
    const double p = pos / count;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
  }

  int build(const Matrix& x, const std::vector<int>& y, std::vector<std::size_t>& rows,
            int depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double pos = 0.0;
    for (std::size_t r : rows) pos += y[r];
    const double count = static_cast<double>(rows.size());
    nodes_[index].prob = pos / count;

    if (depth >= kMaxDepth || pos == 0.0 || pos == count || rows.size() < 2) return index;

    // Best Gini split; ties resolved by the first (feature, threshold).
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 0.0;
    const double parent = gini(pos, count);
    std::vector<std::pair<double, int>> sorted(rows.size());
    for (std::size_t f = 0; f < x.cols(); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) sorted[i] = {x(rows[i], f), y[rows[i]]};
      std::sort(sorted.begin(), sorted.end());
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left_pos += sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = count - nl;
        const double gain =
            parent - (nl / count) * gini(left_pos, nl) - (nr / count) * gini(pos - left_pos, nr);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    nodes_[index].feature = best_feature;
    nodes_[index].threshold = best_threshold;
    nodes_[index].left = build(x, y, left_rows, depth + 1);
    nodes_[index].right = build(x, y, right_rows, depth + 1);
    return index;
  }

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------
// Small MLP (one hidden layer of 64, ReLU, full-batch Adam)
// ---------------------------------------------------------------------

class MlpClassifier : public Classifier {
 public:
  void fit(const Matrix& x, const std::vector<int>& y, std::uint64_t seed) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    Rng rng(seed);
    auto init = [&](std::vector<double>& w, std::size_t fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (double& v : w) v = (2.0 * rng.uniform() - 1.0) * bound;
    };
    w1_.assign(kHidden * d, 0.0);
    b1_.assign(kHidden, 0.0);
    w2_.assign(kHidden, 0.0);
    b2_ = 0.0;
    init(w1_, d);
    init(w2_, kHidden);
    d_ = d;

    std::vector<double> m(w1_.size() + b1_.size() + w2_.size() + 1, 0.0);
    std::vector<double> v(m.size(), 0.0);
    std::vector<double> g(m.size(), 0.0);
    std::vector<double> hidden(kHidden), act(kHidden);

    for (int step = 1; step <= kIters; ++step) {
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const auto row = x.row(r);
        for (std::size_t h = 0; h < kHidden; ++h) {
          double z = b1_[h];
          for (std::size_t j = 0; j < d; ++j) z += w1_[h * d + j] * row[j];
          hidden[h] = z;
          act[h] = std::max(0.0, z);
        }
        double out = b2_;
        for (std::size_t h = 0; h < kHidden; ++h) out += w2_[h] * act[h];
        const double err = (sigmoid(out) - static_cast<double>(y[r])) / static_cast<double>(n);

        double* gw1 = g.data();
        double* gb1 = gw1 + w1_.size();
        double* gw2 = gb1 + b1_.size();
        double* gb2 = gw2 + w2_.size();
        *gb2 += err;
        for (std::size_t h = 0; h < kHidden; ++h) {
          gw2[h] += err * act[h];
          if (hidden[h] > 0.0) {
            const double back = err * w2_[h];
            gb1[h] += back;
            for (std::size_t j = 0; j < d; ++j) gw1[h * d + j] += back * row[j];
          }
        }
      }

      const double bc1 = 1.0 - std::pow(0.9, step);
      const double bc2 = 1.0 - std::pow(0.999, step);
      auto update = [&](double& param, std::size_t i) {
        m[i] = 0.9 * m[i] + 0.1 * g[i];
        v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
        param -= kLr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + 1e-8);
      };
      std::size_t i = 0;
      for (auto& w : w1_) update(w, i++);
      for (auto& b : b1_) update(b, i++);
      for (auto& w : w2_) update(w, i++);
      update(b2_, i);
    }
  }

  std::vector<double> predict_proba(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto row = x.row(r);
      double z_out = b2_;
      for (std::size_t h = 0; h < kHidden; ++h) {
        double z = b1_[h];
        for (std::size_t j = 0; j < d_; ++j) z += w1_[h * d_ + j] * row[j];
        if (z > 0.0) z_out += w2_[h] * z;
      }
      out[r] = sigmoid(z_out);
    }
    return out;
  }

 private:
  static constexpr std::size_t kHidden = 64;
  static constexpr int kIters = 200;
  static constexpr double kLr = 0.02;
  std::size_t d_ = 0;
  std::vector<double> w1_, b1_, w2_;
  double b2_ = 0.0;
};

}  // namespace

std::unique_ptr<Classifier> fit_classifier(ClassifierKind kind, const Matrix& x,
                                           const std::vector<int>& y, std::uint64_t seed) {
  if (x.rows() == 0 || x.rows() != y.size()) {
    throw ConfigError("classifier fit: feature rows and labels must match and be nonempty");
  }
  check_two_classes(y);
  switch (kind) {
    case ClassifierKind::logistic_regression: {
      auto c = std::make_unique<LogisticRegression>();
      c->fit(x, y);
      return c;
    }
    case ClassifierKind::knn: {
      auto c = std::make_unique<KnnClassifier>();
      c->fit(x, y);
      return c;
    }
    case ClassifierKind::decision_tree: {
      auto c = std::make_unique<DecisionTree>();
      c->fit(x, y);
      return c;
    }
    case ClassifierKind::mlp: {
      auto c = std::make_unique<MlpClassifier>();
      c->fit(x, y, seed);
      return c;
    }
  }
  throw ConfigError("unknown classifier kind");
}

namespace {

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

double rank_auroc(const std::vector<int>& y, const std::vector<double>& probs) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && probs[order[j]] == probs[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based, tie-averaged
    for (std::size_t k = i; k < j; ++k) {
      if (y[order[k]] == 1) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double step_auprc(const std::vector<int>& y, const std::vector<double>& probs) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::size_t total_pos = 0;
  for (int v : y) total_pos += v;

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && probs[order[j]] == probs[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (y[order[k]] == 1) ++tp;
      else ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

}  // namespace

Scores score(const std::vector<int>& y_true, const std::vector<double>& probs) {
  if (y_true.empty() || y_true.size() != probs.size()) {
    throw ConfigError("score: labels and probabilities must match and be nonempty");
  }
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0, n_pos = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool pred = probs[i] >= 0.5;
    const bool truth = y_true[i] == 1;
    n_pos += truth;
    if (pred == truth) ++correct;
    if (pred && truth) ++tp;
    else if (pred && !truth) ++fp;
    else if (!pred && truth) ++fn;
  }

  Scores s;
  s.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  s.f1 = f1_score(tp, fp, fn);
  if (n_pos > 0 && n_pos < y_true.size()) {
    s.auroc = rank_auroc(y_true, probs);
    s.auprc = step_auprc(y_true, probs);
  }
  return s;
}

}  // namespace tabdiff
