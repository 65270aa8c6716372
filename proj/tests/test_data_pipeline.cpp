#include "doctest.h"

#include <filesystem>
#include <set>
#include <string>

#include "tabdiff/data_pipeline.hpp"
#include "tabdiff/errors.hpp"
#include "tabdiff/io_util.hpp"
#include "tabdiff/rng.hpp"

using namespace tabdiff;

namespace {

TableSchema test_schema() {
  TableSchema schema;
  schema.columns.push_back({"x", ColumnKind::continuous, {}, {}, {}});
  schema.columns.push_back({"color", ColumnKind::categorical, {"red", "green", "blue"}, {}, {}});
  schema.columns.push_back({"label", ColumnKind::categorical, {"neg", "pos"}, {}, {}});
  schema.target = "label";
  return schema;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "tabdiff_pipeline_tests";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / name).string();
  write_file_atomic(path, content);
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("data_pipeline");

TEST_CASE("load_csv parses a complete file") {
  const auto path = write_temp("ok.csv", "x,color,label\n2,red,neg\n4,green,pos\n6,blue,neg\n");
  const auto table = load_csv(path, test_schema());
  CHECK(table.n_rows() == 3);
  CHECK(table.values(0, 0) == 2.0);
  CHECK(table.values(1, 1) == 1.0);  // green
  CHECK(table.values(2, 2) == 0.0);  // neg
}

TEST_CASE("load_csv accepts reordered headers") {
  const auto path = write_temp("reorder.csv", "label,x,color\nneg,2,red\npos,4,blue\n");
  const auto table = load_csv(path, test_schema());
  CHECK(table.values(1, 0) == 4.0);
  CHECK(table.values(1, 1) == 2.0);  // blue
}

TEST_CASE("load_csv rejects an undeclared category level with location") {
  const auto path = write_temp("level.csv", "x,color,label\n2,red,neg\n4,purple,pos\n");
  CHECK_THROWS_WITH_AS(load_csv(path, test_schema()),
                       doctest::Contains("row 2"), ConfigError);
  try {
    load_csv(path, test_schema());
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("color") != std::string::npos);
    CHECK(std::string(e.what()).find("purple") != std::string::npos);
  }
}

TEST_CASE("load_csv rejects a missing header column before reading rows") {
  const auto path = write_temp("header.csv", "x,color\n9,red\n");
  CHECK_THROWS_WITH_AS(load_csv(path, test_schema()), doctest::Contains("label"), ConfigError);
}

TEST_CASE("load_csv rejects non-numeric continuous cells") {
  const auto path = write_temp("nonnum.csv", "x,color,label\nabc,red,neg\n");
  CHECK_THROWS_WITH_AS(load_csv(path, test_schema()), doctest::Contains("abc"), ConfigError);
}

TEST_CASE("load_csv rejects empty files and missing cells") {
  CHECK_THROWS_AS(load_csv(write_temp("empty.csv", ""), test_schema()), ConfigError);
  const auto path = write_temp("missing.csv", "x,color,label\n2,,neg\n");
  CHECK_THROWS_WITH_AS(load_csv(path, test_schema()), doctest::Contains("missing"), ConfigError);
  CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv", test_schema()), ConfigError);
}

TEST_CASE("fit_transform maps min-max endpoints and one-hot levels") {
  const auto path = write_temp("fit.csv", "x,color,label\n2,red,neg\n4,green,pos\n6,blue,neg\n");
  const auto table = load_csv(path, test_schema());
  const auto [encoded, fitted] = fit_transform(table, test_schema());

  CHECK(encoded.values.cols() == 4);  // 1 continuous + categorical(3); target excluded
  CHECK(encoded.values(0, 0) == doctest::Approx(0.0));
  CHECK(encoded.values(1, 0) == doctest::Approx(0.5));
  CHECK(encoded.values(2, 0) == doctest::Approx(1.0));

  // level index 1 -> (0, 1, 0)
  CHECK(encoded.values(1, 1) == 0.0);
  CHECK(encoded.values(1, 2) == 1.0);
  CHECK(encoded.values(1, 3) == 0.0);

  CHECK(encoded.labels == std::vector<int>{0, 1, 0});
  CHECK(*fitted.columns[0].norm_min == 2.0);
  CHECK(*fitted.columns[0].norm_max == 6.0);
}

TEST_CASE("constant continuous columns are rejected") {
  const auto path = write_temp("const.csv", "x,color,label\n3,red,neg\n3,green,pos\n");
  const auto table = load_csv(path, test_schema());
  CHECK_THROWS_AS(fit_transform(table, test_schema()), ConfigError);
}

TEST_CASE("inverse_transform undoes the fitted transform") {
  const auto path = write_temp("rt.csv",
                               "x,color,label\n2,red,neg\n4,green,pos\n6,blue,neg\n5.5,red,pos\n");
  const auto table = load_csv(path, test_schema());
  const auto [encoded, fitted] = fit_transform(table, test_schema());
  const auto back = inverse_transform(encoded, fitted);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    CHECK(back.values(r, 0) == doctest::Approx(table.values(r, 0)).epsilon(1e-9));
    CHECK(back.values(r, 1) == table.values(r, 1));
    CHECK(back.values(r, 2) == table.values(r, 2));
  }
}

TEST_CASE("inverse_transform decodes by affine inverse and argmax with low-index ties") {
  auto fitted = test_schema();
  fitted.columns[0].norm_min = 2.0;
  fitted.columns[0].norm_max = 6.0;

  EncodedMatrix enc;
  enc.values = Matrix(2, 4);
  enc.labels = {1, 0};
  enc.values(0, 0) = 0.5;
  enc.values(0, 1) = 0.2;
  enc.values(0, 2) = 0.2;
  enc.values(0, 3) = 0.6;
  enc.values(1, 0) = 0.25;
  enc.values(1, 1) = 0.5;
  enc.values(1, 2) = 0.5;
  enc.values(1, 3) = 0.0;

  const auto table = inverse_transform(enc, fitted);
  CHECK(table.values(0, 0) == doctest::Approx(4.0));
  CHECK(table.values(0, 1) == 2.0);  // argmax of (0.2, 0.2, 0.6)
  CHECK(table.values(1, 1) == 0.0);  // tie (0.5, 0.5) -> lowest index
  CHECK(table.values(0, 2) == 1.0);

  enc.values = Matrix(2, 3);
  CHECK_THROWS_AS(inverse_transform(enc, fitted), ConfigError);
}

TEST_CASE("transform passes out-of-range unseen values through unclipped") {
  auto fitted = test_schema();
  fitted.columns[0].norm_min = 2.0;
  fitted.columns[0].norm_max = 6.0;

  RawTable unseen;
  unseen.column_names = {"x", "color", "label"};
  unseen.values = Matrix(1, 3);
  unseen.values(0, 0) = 10.0;  // beyond the fitted max
  unseen.values(0, 1) = 0.0;
  unseen.values(0, 2) = 1.0;
  const auto enc = transform(unseen, fitted);
  CHECK(enc.values(0, 0) == doctest::Approx(2.0));
}

namespace {

RawTable random_table(std::size_t rows, std::uint64_t seed) {
  RawTable table;
  table.column_names = {"x", "color", "label"};
  table.values = Matrix(rows, 3);
  Rng rng(seed);
  for (std::size_t r = 0; r < rows; ++r) {
    table.values(r, 0) = rng.uniform() * 10.0 - 5.0;
    table.values(r, 1) = static_cast<double>(rng.uniform_int(3));
    table.values(r, 2) = static_cast<double>(rng.uniform_int(2));
  }
  return table;
}

}  // namespace

TEST_CASE("one-hot blocks sum to one with entries in {0,1}") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto table = random_table(50, seed);
    const auto [encoded, fitted] = fit_transform(table, test_schema());
    for (std::size_t r = 0; r < encoded.values.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t k = 1; k <= 3; ++k) {
        const double v = encoded.values(r, k);
        CHECK((v == 0.0 || v == 1.0));
        sum += v;
      }
      CHECK(sum == 1.0);
    }
  }
}

TEST_CASE("split produces the documented 70/15/15 partition sizes") {
  const auto t100 = random_table(100, 4);
  const auto s100 = split(t100, {}, 9);
  CHECK(s100.train.n_rows() == 70);
  CHECK(s100.val.n_rows() == 15);
  CHECK(s100.test.n_rows() == 15);

  // floor-based: floor(7) / floor(1.5) / remainder
  const auto t10 = random_table(10, 5);
  const auto s10 = split(t10, {}, 9);
  CHECK(s10.train.n_rows() == 7);
  CHECK(s10.val.n_rows() == 1);
  CHECK(s10.test.n_rows() == 2);
}

TEST_CASE("split is deterministic and partitions the input") {
  const auto table = random_table(53, 6);
  const auto a = split(table, {}, 42);
  const auto b = split(table, {}, 42);
  CHECK(a.train.values == b.train.values);
  CHECK(a.val.values == b.val.values);
  CHECK(a.test.values == b.test.values);

  // Union of the parts is the multiset of input rows.
  auto key = [](const RawTable& t, std::size_t r) {
    return std::to_string(t.values(r, 0)) + "|" + std::to_string(t.values(r, 1)) + "|" +
           std::to_string(t.values(r, 2));
  };
  std::multiset<std::string> input, output;
  for (std::size_t r = 0; r < table.n_rows(); ++r) input.insert(key(table, r));
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    for (std::size_t r = 0; r < part->n_rows(); ++r) output.insert(key(*part, r));
  }
  CHECK(input == output);

  const auto c = split(table, {}, 43);
  CHECK(c.train.values != a.train.values);  // seed matters
}

TEST_CASE("split rejects bad ratios and tiny tables") {
  const auto table = random_table(2, 7);
  CHECK_THROWS_AS(split(table, {}, 1), ConfigError);
  const auto ok = random_table(10, 8);
  CHECK_THROWS_AS(split(ok, {0.5, 0.2, 0.2}, 1), ConfigError);
}

TEST_CASE("schema JSON round trip") {
  const auto schema = test_schema();
  const auto text = schema_to_json_string(schema);
  const auto back = schema_from_json_string(text);
  CHECK(back.columns.size() == 3);
  CHECK(back.columns[1].levels == std::vector<std::string>{"red", "green", "blue"});
  CHECK(back.target == "label");

  CHECK_THROWS_AS(schema_from_json_string("{not json"), ConfigError);
  CHECK_THROWS_AS(schema_from_json_string(R"({"columns":[]})"), ConfigError);
  CHECK_THROWS_AS(schema_from_json_string(
                      R"({"columns":[{"name":"a","kind":"categorical","levels":["x"]}]})"),
                  ConfigError);
  CHECK_THROWS_AS(
      schema_from_json_string(
          R"({"columns":[{"name":"a","kind":"continuous"}],"target":"a"})"),
      ConfigError);
}

TEST_SUITE_END();
