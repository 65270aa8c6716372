#include "tabdiff/data_pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "tabdiff/errors.hpp"
#include "tabdiff/io_util.hpp"
#include "tabdiff/rng.hpp"

namespace tabdiff {

namespace {

bool parse_double_strict(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) return false;
  out = v;
  return true;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

EncodingLayout make_layout(const TableSchema& schema) {
  schema.validate();
  const auto target_idx = schema.target_index();
  EncodingLayout layout;
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    if (target_idx && *target_idx == i) continue;
    if (schema.columns[i].kind == ColumnKind::continuous) {
      layout.cont_columns.push_back(i);
    }
  }
  layout.n_cont = layout.cont_columns.size();
  std::size_t offset = layout.n_cont;
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    if (target_idx && *target_idx == i) continue;
    if (schema.columns[i].kind == ColumnKind::categorical) {
      layout.cat_blocks.push_back({i, offset, schema.columns[i].cardinality()});
      offset += schema.columns[i].cardinality();
    }
  }
  layout.width = offset;
  return layout;
}

RawTable load_csv(const std::string& path, const TableSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ConfigError("'" + path + "' is empty");

  // Header: exactly the schema's column names, any order.
  const auto header = split_fields(lines[0]);
  std::unordered_map<std::string, std::size_t> header_pos;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!header_pos.emplace(header[i], i).second) {
      throw ConfigError("duplicate header column '" + header[i] + "' in '" + path + "'");
    }
  }
  std::vector<std::size_t> field_of_column(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    auto it = header_pos.find(schema.columns[c].name);
    if (it == header_pos.end()) {
      throw ConfigError("'" + path + "': header is missing column '" + schema.columns[c].name + "'");
    }
    field_of_column[c] = it->second;
    header_pos.erase(it);
  }
  if (!header_pos.empty()) {
    throw ConfigError("'" + path + "': unknown column '" + header_pos.begin()->first + "' in header");
  }

  // Level lookup per categorical column.
  std::vector<std::unordered_map<std::string, int>> level_index(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& col = schema.columns[c];
    for (std::size_t k = 0; k < col.levels.size(); ++k) {
      level_index[c][col.levels[k]] = static_cast<int>(k);
    }
  }

  RawTable table;
  for (const auto& col : schema.columns) table.column_names.push_back(col.name);
  table.values = Matrix(lines.size() - 1, schema.columns.size());

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    if (fields.size() != header.size()) {
      throw ConfigError("'" + path + "' row " + std::to_string(r) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const auto& col = schema.columns[c];
      const std::string& cell = fields[field_of_column[c]];
      if (cell.empty()) {
        throw ConfigError("'" + path + "' row " + std::to_string(r) + ", column '" + col.name +
                          "': missing value");
      }
      if (col.kind == ColumnKind::continuous) {
        double v = 0.0;
        if (!parse_double_strict(cell, v)) {
          throw ConfigError("'" + path + "' row " + std::to_string(r) + ", column '" + col.name +
                            "': '" + cell + "' is not a finite number");
        }
        table.values(r - 1, c) = v;
      } else {
        auto it = level_index[c].find(cell);
        if (it == level_index[c].end()) {
          throw ConfigError("'" + path + "' row " + std::to_string(r) + ", column '" + col.name +
                            "': '" + cell + "' is not a declared level");
        }
        table.values(r - 1, c) = it->second;
      }
    }
  }
  return table;
}

std::string table_to_csv_string(const RawTable& table, const TableSchema& schema) {
  std::string out;
  for (std::size_t c = 0; c < table.column_names.size(); ++c) {
    if (c > 0) out.push_back(',');
    out += table.column_names[c];
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      if (c > 0) out.push_back(',');
      if (schema.columns[c].kind == ColumnKind::continuous) {
        out += format_double(table.values(r, c));
      } else {
        const int level = static_cast<int>(table.values(r, c));
        out += schema.columns[c].levels.at(level);
      }
    }
    out.push_back('\n');
  }
  return out;
}

void save_csv(const std::string& path, const RawTable& table, const TableSchema& schema) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << table_to_csv_string(table, schema);
}

TableSchema fit_normalization(const RawTable& table, const TableSchema& schema) {
  if (table.n_rows() == 0) throw ConfigError("cannot fit normalization on an empty table");
  TableSchema fitted = schema;
  for (std::size_t c = 0; c < fitted.columns.size(); ++c) {
    auto& col = fitted.columns[c];
    if (col.kind != ColumnKind::continuous) continue;
    double lo = table.values(0, c);
    double hi = lo;
    for (std::size_t r = 1; r < table.n_rows(); ++r) {
      lo = std::min(lo, table.values(r, c));
      hi = std::max(hi, table.values(r, c));
    }
    if (lo == hi) {
      throw ConfigError("continuous column '" + col.name + "' is constant; cannot min-max normalize");
    }
    col.norm_min = lo;
    col.norm_max = hi;
  }
  return fitted;
}

EncodedMatrix transform(const RawTable& table, const TableSchema& fitted) {
  if (!fitted.is_fitted()) throw ConfigError("transform requires a fitted schema");
  const auto layout = make_layout(fitted);
  const auto target_idx = fitted.target_index();

  EncodedMatrix enc;
  enc.values = Matrix(table.n_rows(), layout.width);
  if (target_idx) enc.labels.resize(table.n_rows());

  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t slot = 0; slot < layout.cont_columns.size(); ++slot) {
      const auto& col = fitted.columns[layout.cont_columns[slot]];
      const double v = table.values(r, layout.cont_columns[slot]);
      enc.values(r, slot) = (v - *col.norm_min) / (*col.norm_max - *col.norm_min);
    }
    for (const auto& block : layout.cat_blocks) {
      const int level = static_cast<int>(table.values(r, block.column));
      enc.values(r, block.offset + level) = 1.0;
    }
    if (target_idx) enc.labels[r] = static_cast<int>(table.values(r, *target_idx));
  }
  return enc;
}

std::pair<EncodedMatrix, TableSchema> fit_transform(const RawTable& table,
                                                    const TableSchema& schema) {
  TableSchema fitted = fit_normalization(table, schema);
  return {transform(table, fitted), fitted};
}

RawTable inverse_transform(const EncodedMatrix& encoded, const TableSchema& fitted) {
  if (!fitted.is_fitted()) throw ConfigError("inverse_transform requires a fitted schema");
  const auto layout = make_layout(fitted);
  if (encoded.values.cols() != layout.width) {
    throw ConfigError("encoded width " + std::to_string(encoded.values.cols()) +
                      " does not match schema width " + std::to_string(layout.width));
  }
  const auto target_idx = fitted.target_index();
  if (target_idx && encoded.labels.size() != encoded.values.rows()) {
    throw ConfigError("conditional schema requires one label per encoded row");
  }

  RawTable table;
  for (const auto& col : fitted.columns) table.column_names.push_back(col.name);
  table.values = Matrix(encoded.values.rows(), fitted.columns.size());

  for (std::size_t r = 0; r < encoded.values.rows(); ++r) {
    for (std::size_t slot = 0; slot < layout.cont_columns.size(); ++slot) {
      const auto& col = fitted.columns[layout.cont_columns[slot]];
      const double v = encoded.values(r, slot);
      table.values(r, layout.cont_columns[slot]) = v * (*col.norm_max - *col.norm_min) + *col.norm_min;
    }
    for (const auto& block : layout.cat_blocks) {
      std::size_t best = 0;
      double best_v = encoded.values(r, block.offset);
      for (std::size_t k = 1; k < block.cardinality; ++k) {
        const double v = encoded.values(r, block.offset + k);
        if (v > best_v) {
          best_v = v;
          best = k;
        }
      }
      table.values(r, block.column) = static_cast<double>(best);
    }
    if (target_idx) table.values(r, *target_idx) = encoded.labels[r];
  }
  return table;
}

namespace {

RawTable take_rows(const RawTable& table, const std::vector<std::size_t>& rows,
                   std::size_t begin, std::size_t end) {
  RawTable out;
  out.column_names = table.column_names;
  out.values = Matrix(end - begin, table.values.cols());
  for (std::size_t i = begin; i < end; ++i) {
    const auto src = table.values.row(rows[i]);
    auto dst = out.values.row(i - begin);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

}  // namespace

SplitResult split(const RawTable& table, SplitRatios ratios, std::uint64_t seed) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  const std::size_t n = table.n_rows();
  if (n < 3) throw ConfigError("split requires at least 3 rows");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_int(i + 1);
    std::swap(order[i], order[j]);
  }

  const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(n)));

  SplitResult result;
  result.train = take_rows(table, order, 0, n_train);
  result.val = take_rows(table, order, n_train, n_train + n_val);
  result.test = take_rows(table, order, n_train + n_val, n);
  return result;
}

}  // namespace tabdiff
