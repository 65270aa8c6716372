#pragma once

#include <cstdint>
#include <string>

#include "tabdiff/schema.hpp"

namespace tabdiff {

enum class ToyKind { mixed, continuous, categorical };

ToyKind toy_kind_from_string(const std::string& s);

struct ToyOptions {
  ToyKind kind = ToyKind::mixed;
  std::size_t rows = 2858;  // 70% split of this is 2000 training rows
  double positive_rate = 0.5;
  std::uint64_t seed = 0;
};

struct ToyDataset {
  TableSchema schema;
  RawTable table;
};

// Bundled synthetic ground truth: a binary target drives a latent mixture
// component; the component sets two correlated Gaussian features and the
// categorical level frequencies. The continuous/categorical kinds keep the
// target but drop the other feature family.
ToyDataset make_toy_dataset(const ToyOptions& options);

}  // namespace tabdiff
