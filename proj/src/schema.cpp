#include "tabdiff/schema.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "tabdiff/errors.hpp"

namespace tabdiff {

void TableSchema::validate() const {
  if (columns.empty()) throw ConfigError("schema declares no columns");
  std::unordered_set<std::string> seen;
  for (const auto& col : columns) {
    if (col.name.empty()) throw ConfigError("schema column with empty name");
    if (!seen.insert(col.name).second) {
      throw ConfigError("duplicate column name '" + col.name + "'");
    }
    if (col.kind == ColumnKind::categorical) {
      if (col.levels.size() < 2) {
        throw ConfigError("categorical column '" + col.name + "' needs at least 2 levels");
      }
      std::unordered_set<std::string> level_seen;
      for (const auto& lvl : col.levels) {
        if (!level_seen.insert(lvl).second) {
          throw ConfigError("duplicate level '" + lvl + "' in column '" + col.name + "'");
        }
      }
    } else if (!col.levels.empty()) {
      throw ConfigError("continuous column '" + col.name + "' must not declare levels");
    }
  }
  if (target) {
    bool found = false;
    for (const auto& col : columns) {
      if (col.name == *target) {
        if (col.kind != ColumnKind::categorical) {
          throw ConfigError("target column '" + *target + "' must be categorical");
        }
        found = true;
      }
    }
    if (!found) throw ConfigError("target column '" + *target + "' not declared in schema");
  }
}

std::optional<std::size_t> TableSchema::target_index() const {
  if (!target) return std::nullopt;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == *target) return i;
  }
  return std::nullopt;
}

std::size_t TableSchema::n_target_classes() const {
  auto idx = target_index();
  return idx ? columns[*idx].cardinality() : 0;
}

std::size_t TableSchema::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  throw ConfigError("unknown column '" + name + "'");
}

bool TableSchema::is_fitted() const {
  for (const auto& col : columns) {
    if (!col.is_fitted()) return false;
  }
  return true;
}

namespace {

using json = nlohmann::ordered_json;

json column_to_json(const ColumnSpec& col) {
  json j;
  j["name"] = col.name;
  j["kind"] = col.kind == ColumnKind::continuous ? "continuous" : "categorical";
  if (col.kind == ColumnKind::categorical) j["levels"] = col.levels;
  if (col.norm_min) j["norm_min"] = *col.norm_min;
  if (col.norm_max) j["norm_max"] = *col.norm_max;
  return j;
}

ColumnSpec column_from_json(const json& j) {
  ColumnSpec col;
  col.name = j.at("name").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "continuous") {
    col.kind = ColumnKind::continuous;
  } else if (kind == "categorical") {
    col.kind = ColumnKind::categorical;
    col.levels = j.at("levels").get<std::vector<std::string>>();
  } else {
    throw ConfigError("column '" + col.name + "': unknown kind '" + kind + "'");
  }
  if (j.contains("norm_min")) col.norm_min = j.at("norm_min").get<double>();
  if (j.contains("norm_max")) col.norm_max = j.at("norm_max").get<double>();
  return col;
}

}  // namespace

std::string schema_to_json_string(const TableSchema& schema) {
  json j;
  j["columns"] = json::array();
  for (const auto& col : schema.columns) j["columns"].push_back(column_to_json(col));
  if (schema.target) j["target"] = *schema.target;
  return j.dump(2) + "\n";
}

TableSchema schema_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema is not valid JSON: ") + e.what());
  }
  TableSchema schema;
  try {
    for (const auto& jc : j.at("columns")) schema.columns.push_back(column_from_json(jc));
    if (j.contains("target") && !j.at("target").is_null()) {
      schema.target = j.at("target").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed schema: ") + e.what());
  }
  schema.validate();
  return schema;
}

TableSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return schema_from_json_string(buf.str());
}

}  // namespace tabdiff
