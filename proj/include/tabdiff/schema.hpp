#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tabdiff/matrix.hpp"

namespace tabdiff {

enum class ColumnKind { continuous, categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  // Categorical only: ordered level names as declared in the schema file.
  // Encodings follow this order, not the order levels appear in data.
  std::vector<std::string> levels;
  // Continuous only: normalization bounds fitted from the training split.
  std::optional<double> norm_min;
  std::optional<double> norm_max;

  std::size_t cardinality() const { return levels.size(); }
  bool is_fitted() const {
    return kind == ColumnKind::categorical || (norm_min && norm_max);
  }
};

struct TableSchema {
  std::vector<ColumnSpec> columns;
  std::optional<std::string> target;  // must name a categorical column

  // Throws ConfigError on duplicate names, categorical K < 2, or a target
  // that is missing or not categorical.
  void validate() const;

  bool is_conditional() const { return target.has_value(); }
  std::optional<std::size_t> target_index() const;
  std::size_t n_target_classes() const;
  std::size_t column_index(const std::string& name) const;
  bool is_fitted() const;
};

// Raw table in schema column order. Continuous cells hold the value,
// categorical cells hold the level index.
struct RawTable {
  std::vector<std::string> column_names;
  Matrix values;

  std::size_t n_rows() const { return values.rows(); }
};

TableSchema load_schema(const std::string& path);
std::string schema_to_json_string(const TableSchema& schema);
TableSchema schema_from_json_string(const std::string& text);

}  // namespace tabdiff
