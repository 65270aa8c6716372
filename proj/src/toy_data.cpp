#include "tabdiff/toy_data.hpp"

#include <span>

#include "tabdiff/errors.hpp"
#include "tabdiff/rng.hpp"

namespace tabdiff {

ToyKind toy_kind_from_string(const std::string& s) {
  if (s == "mixed") return ToyKind::mixed;
  if (s == "continuous") return ToyKind::continuous;
  if (s == "categorical") return ToyKind::categorical;
  throw ConfigError("unknown toy kind '" + s + "' (expected mixed, continuous, or categorical)");
}

ToyDataset make_toy_dataset(const ToyOptions& options) {
  if (options.rows < 10) throw ConfigError("toy dataset needs at least 10 rows");
  if (options.positive_rate <= 0.0 || options.positive_rate >= 1.0) {
    throw ConfigError("positive rate must lie strictly between 0 and 1");
  }

  const bool with_cont = options.kind != ToyKind::categorical;
  const bool with_cat = options.kind != ToyKind::continuous;

  TableSchema schema;
  if (with_cont) {
    schema.columns.push_back({"x1", ColumnKind::continuous, {}, {}, {}});
    schema.columns.push_back({"x2", ColumnKind::continuous, {}, {}, {}});
  }
  if (with_cat) {
    schema.columns.push_back({"group", ColumnKind::categorical, {"g0", "g1", "g2"}, {}, {}});
    if (options.kind == ToyKind::categorical) {
      schema.columns.push_back({"flag", ColumnKind::categorical, {"off", "on"}, {}, {}});
    }
  }
  schema.columns.push_back({"label", ColumnKind::categorical, {"neg", "pos"}, {}, {}});
  schema.target = "label";
  schema.validate();

  RawTable table;
  for (const auto& col : schema.columns) table.column_names.push_back(col.name);
  table.values = Matrix(options.rows, schema.columns.size());

  // Component means and a correlated noise factor (rho = 0.6).
  const double mu[2][2] = {{-0.8, -0.4}, {0.9, 0.7}};
  const double l00 = 0.30, l10 = 0.15, l11 = 0.20;
  const double group_probs[2][3] = {{0.60, 0.30, 0.10}, {0.15, 0.30, 0.55}};

  Rng rng(options.seed);
  for (std::size_t r = 0; r < options.rows; ++r) {
    const int y = rng.uniform() < options.positive_rate ? 1 : 0;
    const int z = rng.uniform() < (y == 1 ? 0.8 : 0.2) ? 1 : 0;
    std::size_t c = 0;
    if (with_cont) {
      const double n1 = rng.normal();
      const double n2 = rng.normal();
      table.values(r, c++) = mu[z][0] + l00 * n1;
      table.values(r, c++) = mu[z][1] + l10 * n1 + l11 * n2;
    }
    if (with_cat) {
      table.values(r, c++) =
          static_cast<double>(rng.categorical(std::span<const double>(group_probs[z], 3)));
      if (options.kind == ToyKind::categorical) {
        table.values(r, c++) = rng.uniform() < (z == 1 ? 0.75 : 0.25) ? 1.0 : 0.0;
      }
    }
    table.values(r, c) = y;
  }

  return {std::move(schema), std::move(table)};
}

}  // namespace tabdiff
