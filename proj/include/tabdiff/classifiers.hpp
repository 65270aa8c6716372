#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabdiff/matrix.hpp"

namespace tabdiff {

enum class ClassifierKind { logistic_regression, knn, decision_tree, mlp };

inline constexpr std::array<ClassifierKind, 4> kAllClassifierKinds = {
    ClassifierKind::logistic_regression,
    ClassifierKind::knn,
    ClassifierKind::decision_tree,
    ClassifierKind::mlp,
};

std::string to_string(ClassifierKind kind);

// Binary classifiers with deterministic fits. predict_proba returns the
// positive-class probability per row; the decision rule is p >= 0.5.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::vector<double> predict_proba(const Matrix& x) const = 0;
};

// Throws ConfigError when y holds fewer than two classes.
std::unique_ptr<Classifier> fit_classifier(ClassifierKind kind, const Matrix& x,
                                           const std::vector<int>& y, std::uint64_t seed);

struct Scores {
  double accuracy = 0.0;
  double f1 = 0.0;
  std::optional<double> auroc;  // absent when y_true is single-class
  std::optional<double> auprc;
};

// Accuracy and F1 at threshold 0.5 (positive class = 1); AUROC by the
// tie-averaged rank statistic; AUPRC by precision-recall step integration.
Scores score(const std::vector<int>& y_true, const std::vector<double>& probs);

}  // namespace tabdiff
