#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tabdiff/matrix.hpp"
#include "tabdiff/schema.hpp"

namespace tabdiff {

// Model-space layout: all continuous columns first (schema order), then
// one one-hot block per categorical feature column. The target column, if
// declared, is excluded and carried as a separate label vector.
struct EncodingLayout {
  struct CatBlock {
    std::size_t column;       // index into schema.columns
    std::size_t offset;       // first encoded dimension of the block
    std::size_t cardinality;  // K
  };

  std::size_t width = 0;
  std::size_t n_cont = 0;
  std::vector<std::size_t> cont_columns;  // schema column index per slot
  std::vector<CatBlock> cat_blocks;
};

EncodingLayout make_layout(const TableSchema& schema);

struct EncodedMatrix {
  Matrix values;
  std::vector<int> labels;  // empty when the schema has no target
};

// CSV ingestion against a declared schema. Header must contain exactly the
// schema's column names (any order); all cells must parse. Errors carry
// the offending row/column.
RawTable load_csv(const std::string& path, const TableSchema& schema);
std::string table_to_csv_string(const RawTable& table, const TableSchema& schema);
void save_csv(const std::string& path, const RawTable& table, const TableSchema& schema);

// Fits min-max bounds per continuous column (rejecting constant columns)
// and returns the fitted schema copy. Call on the training split only.
TableSchema fit_normalization(const RawTable& table, const TableSchema& schema);

// Maps a table into model space with a fitted schema. Values from data the
// transform was not fitted on may fall outside [0,1]; they pass through
// unclipped.
EncodedMatrix transform(const RawTable& table, const TableSchema& fitted);

std::pair<EncodedMatrix, TableSchema> fit_transform(const RawTable& table,
                                                    const TableSchema& schema);

// Continuous cells denormalized, categorical decoded by one-hot argmax
// (ties to the lowest index). Labels, when present, fill the target column.
RawTable inverse_transform(const EncodedMatrix& encoded, const TableSchema& fitted);

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

struct SplitResult {
  RawTable train;
  RawTable val;
  RawTable test;
};

// Deterministic shuffled partition: |train| = floor(r_train*n),
// |val| = floor(r_val*n), remainder rows go to test.
SplitResult split(const RawTable& table, SplitRatios ratios, std::uint64_t seed);

}  // namespace tabdiff
