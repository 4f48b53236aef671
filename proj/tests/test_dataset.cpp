#include <gtest/gtest.h>

#include "georf/dataset.hpp"
#include "georf/random.hpp"

using namespace georf;

namespace {

RawTable simple_table() {
  RawTable t;
  t.column_names = {"a", "b", "target", "x", "y"};
  t.rows = {
      {"1.0", "2.0", "3.0", "0.0", "0.0"},
      {"4.0", "5.0", "6.0", "1.0", "1.0"},
      {"7.0", "8.0", "9.0", "2.0", "2.0"},
  };
  return t;
}

ColumnSpec simple_columns() {
  ColumnSpec c;
  c.features = {"a", "b"};
  c.target = "target";
  return c;
}

} // namespace

TEST(validate_dataset, accepts_numeric_table) {
  const auto result = validate_dataset(simple_table(), simple_columns());
  EXPECT_EQ(result.dataset.size(), 3u);
  EXPECT_EQ(result.dataset.feature_count(), 2u);
  EXPECT_DOUBLE_EQ(result.dataset.feature(1, 0), 4.0);
  EXPECT_DOUBLE_EQ(result.dataset.target(2), 9.0);
  EXPECT_DOUBLE_EQ(result.dataset.coord(1).x, 1.0);
  EXPECT_TRUE(result.warnings.empty());
}

TEST(validate_dataset, na_in_target_names_row) {
  RawTable t = simple_table();
  t.rows[1][2] = "NA";
  try {
    validate_dataset(t, simple_columns());
    FAIL() << "expected NonNumericCell";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::non_numeric_cell);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(validate_dataset, duplicate_coordinates_warn_not_reject) {
  RawTable t = simple_table();
  t.rows[1][3] = "1.0";
  t.rows[1][4] = "2.0";
  t.rows[2][3] = "1.0";
  t.rows[2][4] = "2.0";
  const auto result = validate_dataset(t, simple_columns());
  ASSERT_EQ(result.warnings.size(), 1u);
  EXPECT_NE(result.warnings[0].find("rows 2 and 3"), std::string::npos);
}

TEST(validate_dataset, missing_column) {
  ColumnSpec c = simple_columns();
  c.target = "outcome";
  try {
    validate_dataset(simple_table(), c);
    FAIL() << "expected MissingColumn";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_column);
    EXPECT_NE(std::string(e.what()).find("outcome"), std::string::npos);
  }
}

TEST(validate_dataset, rejects_single_row) {
  RawTable t = simple_table();
  t.rows.resize(1);
  EXPECT_THROW(validate_dataset(t, simple_columns()), Error);
}

TEST(validate_dataset, column_order_irrelevant) {
  RawTable t;
  t.column_names = {"y", "target", "b", "x", "a"};
  t.rows = {
      {"0.0", "3.0", "2.0", "0.0", "1.0"},
      {"1.0", "6.0", "5.0", "1.0", "4.0"},
      {"2.0", "9.0", "8.0", "2.0", "7.0"},
  };
  const auto shuffled = validate_dataset(t, simple_columns());
  const auto straight = validate_dataset(simple_table(), simple_columns());
  EXPECT_TRUE(shuffled.dataset == straight.dataset);
}

// Render a dataset back to a table and validate again: the result must be an
// equal dataset (idempotence).
TEST(validate_dataset, idempotent) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.next_index(30);
    const std::size_t S = 1 + rng.next_index(4);
    RawTable t;
    t.column_names = {"x", "y", "target"};
    ColumnSpec c;
    c.target = "target";
    for (std::size_t j = 0; j < S; ++j) {
      t.column_names.push_back("f" + std::to_string(j));
      c.features.push_back("f" + std::to_string(j));
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row = {std::to_string(rng.next_uniform(-10, 10)),
                                      std::to_string(rng.next_uniform(-10, 10)),
                                      std::to_string(rng.next_uniform(-10, 10))};
      for (std::size_t j = 0; j < S; ++j) row.push_back(std::to_string(rng.next_uniform(-10, 10)));
      t.rows.push_back(std::move(row));
    }
    const auto once = validate_dataset(t, c);

    // Round-trip through a table rendered with exact formatting.
    RawTable again;
    again.column_names = t.column_names;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row(t.column_names.size());
      char buf[64];
      const auto fmt = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
      };
      row[0] = fmt(once.dataset.coord(i).x);
      row[1] = fmt(once.dataset.coord(i).y);
      row[2] = fmt(once.dataset.target(i));
      for (std::size_t j = 0; j < S; ++j) row[3 + j] = fmt(once.dataset.feature(i, j));
      again.rows.push_back(std::move(row));
    }
    const auto twice = validate_dataset(again, c);
    EXPECT_TRUE(once.dataset == twice.dataset) << "trial " << trial;
  }
}

// Fuzz: anything accepted satisfies every dataset invariant. Even trials are
// clean numeric tables (guaranteed acceptance), odd trials are adversarial.
TEST(validate_dataset, accepted_tables_satisfy_invariants) {
  Rng rng(99);
  int accepted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const bool adversarial = trial % 2 == 1;
    RawTable t;
    t.column_names = {"f1", "target", "x", "y"};
    const std::size_t n = rng.next_index(6); // includes degenerate sizes
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row;
      for (int j = 0; j < 4; ++j) {
        switch (adversarial ? rng.next_index(5) : 4) {
          case 0: row.push_back("NA"); break;
          case 1: row.push_back(""); break;
          case 2: row.push_back("inf"); break;
          default: row.push_back(std::to_string(rng.next_uniform(-5, 5)));
        }
      }
      t.rows.push_back(std::move(row));
    }
    ColumnSpec c;
    c.features = {"f1"};
    c.target = "target";
    try {
      const auto result = validate_dataset(t, c);
      ++accepted;
      const SpatialDataset& d = result.dataset;
      EXPECT_GE(d.size(), 2u);
      EXPECT_GE(d.feature_count(), 1u);
      for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_TRUE(std::isfinite(d.target(i)));
        EXPECT_TRUE(std::isfinite(d.coord(i).x));
        EXPECT_TRUE(std::isfinite(d.coord(i).y));
        for (std::size_t j = 0; j < d.feature_count(); ++j)
          EXPECT_TRUE(std::isfinite(d.feature(i, j)));
      }
    } catch (const Error&) {
      // rejected inputs are fine
    }
  }
  EXPECT_GT(accepted, 0);
}

TEST(mtry_spec, symbolic_resolution) {
  EXPECT_EQ(MtrySpec::all().resolve(7), 7);
  EXPECT_EQ(MtrySpec::one_third().resolve(7), 3);  // ceil(7/3)
  EXPECT_EQ(MtrySpec::one_third().resolve(1), 1);
  EXPECT_EQ(MtrySpec::sqrt().resolve(9), 3);
  EXPECT_EQ(MtrySpec::sqrt().resolve(2), 1);
  EXPECT_EQ(MtrySpec::fixed(2).resolve(4), 2);
  EXPECT_THROW(MtrySpec::fixed(5).resolve(4), Error);
  EXPECT_EQ(MtrySpec::parse("sqrt").mode, MtrySpec::Mode::sqrt_features);
  EXPECT_EQ(MtrySpec::parse("3").value, 3);
  EXPECT_THROW(MtrySpec::parse("bogus"), Error);
}

TEST(grf_config, validation) {
  GrfConfig c;
  c.bandwidth_lambda = 10;
  EXPECT_NO_THROW(c.validate(50, 3));
  c.bandwidth_lambda = 50;
  EXPECT_THROW(c.validate(50, 3), Error); // lambda must be < n
  c.bandwidth_lambda = 1;
  EXPECT_THROW(c.validate(50, 3), Error);
  c.bandwidth_lambda = 10;
  c.local_weight_alpha = 1.5;
  EXPECT_THROW(c.validate(50, 3), Error);
}
