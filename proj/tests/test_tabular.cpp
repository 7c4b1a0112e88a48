#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "synthlab/csv.hpp"
#include "synthlab/design.hpp"
#include "synthlab/schema.hpp"

using namespace synthlab;
using testutil::cat;
using testutil::cont;

TEST(Schema, RejectsDuplicateNames) {
  EXPECT_THROW(Schema({cont("a"), cont("a")}), std::invalid_argument);
}

TEST(Schema, RejectsDuplicateLevels) {
  EXPECT_THROW(Schema({cat("s", {"M", "M"})}), std::invalid_argument);
}

TEST(Schema, RejectsMissingCodeCollidingWithLevel) {
  EXPECT_THROW(Schema({cat("s", {"M", "F"}, {"M"})}), std::invalid_argument);
}

TEST(Schema, RejectsTwoStrata) {
  EXPECT_THROW(Schema({cat("a", {"x", "y"}, {}, VarRole::Stratum),
                       cat("b", {"x", "y"}, {}, VarRole::Stratum)}),
               std::invalid_argument);
}

TEST(ParseCsv, ThreeRowRoundTrip) {
  Schema s({cont("age"), cat("sex", {"M", "F"})});
  auto t = testutil::from_csv_text("age,sex\n31,M\n44,F\n28,M\n", s);
  EXPECT_EQ(t.n_rows(), 3u);
  EXPECT_EQ(t.at(0, 0).value, 31.0);
  EXPECT_EQ(t.at(1, 1).value, 1.0);  // F
}

TEST(ParseCsv, HeaderOrderInsensitive) {
  Schema s({cont("age"), cat("sex", {"M", "F"})});
  auto t = testutil::from_csv_text("sex,age\nM,31\n", s);
  EXPECT_EQ(t.at(0, 0).value, 31.0);
  EXPECT_EQ(t.at(0, 1).value, 0.0);
}

TEST(ParseCsv, MissingCodeStoredAsMarker) {
  Schema s({cont("AGE0", {"-999"})});
  auto t = testutil::from_csv_text("AGE0\n42\n-999\n", s);
  EXPECT_FALSE(t.at(0, 0).is_missing());
  EXPECT_TRUE(t.at(1, 0).is_missing());
}

TEST(ParseCsv, RejectsUnknownCategoricalValueNamingRowAndColumn) {
  Schema s({cat("sex", {"M", "F"})});
  try {
    testutil::from_csv_text("sex\nM\nZ\n", s);
    FAIL() << "expected rejection";
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find(":3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sex"), std::string::npos) << msg;
  }
}

TEST(ParseCsv, RejectsUnknownColumn) {
  Schema s({cont("age")});
  EXPECT_THROW(testutil::from_csv_text("age,bogus\n1,2\n", s), std::runtime_error);
}

TEST(ParseCsv, WriteParseIsIdentity) {
  Schema s({cont("age", {"-999"}), cat("sex", {"M", "F"}, {"?"})});
  auto t = testutil::from_csv_text("age,sex\n31.5,M\n-999,?\n12,F\n", s);
  auto t2 = testutil::from_csv_text(testutil::to_csv_text(t), s);
  ASSERT_EQ(t2.n_rows(), t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r)
    for (std::size_t c = 0; c < s.size(); ++c)
      EXPECT_TRUE(t.at(r, c) == t2.at(r, c));
}

TEST(EncodeDesign, DummyCoding) {
  Schema s({cat("sex", {"M", "F"})});
  auto t = testutil::from_csv_text("sex\nM\nF\nM\n", s);
  auto dm = encode_design(t, {"sex"});
  ASSERT_EQ(dm.columns(), 2);
  EXPECT_EQ(dm.X(0, 1), 0.0);
  EXPECT_EQ(dm.X(1, 1), 1.0);
  EXPECT_EQ(dm.X(2, 1), 0.0);
}

TEST(EncodeDesign, InterceptOnly) {
  Schema s({cont("x")});
  auto t = testutil::from_csv_text("x\n1\n2\n3\n4\n", s);
  auto dm = encode_design(t, {});
  ASSERT_EQ(dm.rows(), 4);
  ASSERT_EQ(dm.columns(), 1);
  EXPECT_EQ(dm.X.col(0).sum(), 4.0);
}

TEST(EncodeDesign, MissingContinuousGetsMeanAndIndicator) {
  Schema s({cont("x", {"-999"})});
  auto t = testutil::from_csv_text("x\n1\n-999\n3\n", s);
  auto dm = encode_design(t, {"x"});
  ASSERT_EQ(dm.columns(), 3);  // intercept, value, indicator
  EXPECT_DOUBLE_EQ(dm.X(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(dm.X(1, 1), 2.0);  // nonmissing mean of {1, 3}
  EXPECT_DOUBLE_EQ(dm.X(2, 1), 3.0);
  EXPECT_DOUBLE_EQ(dm.X(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(dm.X(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(dm.X(2, 2), 0.0);
}

TEST(EncodeDesign, MissingCategoricalBecomesExtraLevel) {
  Schema s({cat("c", {"A", "B"}, {"?"})});
  auto t = testutil::from_csv_text("c\nA\n?\nB\n", s);
  auto dm = encode_design(t, {"c"});
  // intercept + (3 effective levels - 1) dummies
  ASSERT_EQ(dm.columns(), 3);
  EXPECT_EQ(dm.X(1, 2), 1.0);  // missing pseudo-level
  EXPECT_EQ(dm.X(2, 1), 1.0);  // level B
}

TEST(EncodeDesign, Deterministic) {
  Schema s({cont("x", {"-9"}), cat("c", {"A", "B", "C"})});
  auto t = testutil::from_csv_text("x,c\n1,A\n-9,C\n5,B\n2,A\n", s);
  auto a = encode_design(t, {"x", "c"});
  auto b = encode_design(t, {"x", "c"});
  EXPECT_EQ(a.X, b.X);
}

// column count = 1 + #continuous + sum(levels-1) + #indicators for random schemas
TEST(EncodeDesign, ColumnCountFormulaProperty) {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VariableDef> defs;
    int n_cont = 0, n_ind = 0, dummy_cols = 0;
    int nv = 1 + static_cast<int>(gen() % 6);
    for (int i = 0; i < nv; ++i) {
      bool is_cont = gen() % 2 == 0;
      bool has_missing = gen() % 3 == 0;
      std::vector<std::string> codes;
      if (has_missing) codes.push_back("-999");
      std::string nm = "v" + std::to_string(i);
      if (is_cont) {
        defs.push_back(cont(nm, codes));
        ++n_cont;
        if (has_missing) ++n_ind;
      } else {
        int L = 2 + static_cast<int>(gen() % 4);
        std::vector<std::string> levels;
        for (int l = 0; l < L; ++l) levels.push_back("l" + std::to_string(l));
        defs.push_back(cat(nm, levels, codes));
        dummy_cols += L + (has_missing ? 1 : 0) - 1;
      }
    }
    Schema s(defs);
    DataTable t(s, 5);
    for (std::size_t c = 0; c < s.size(); ++c)
      for (std::size_t r = 0; r < 5; ++r)
        t.column(c)[r] = Cell::of(s.var(c).kind == VarKind::Categorical
                                      ? static_cast<double>(gen() % s.var(c).levels.size())
                                      : static_cast<double>(gen() % 100));
    std::vector<std::string> preds;
    for (const auto& v : s.variables()) preds.push_back(v.name);
    auto dm = encode_design(t, preds);
    EXPECT_EQ(dm.columns(), 1 + n_cont + dummy_cols + n_ind);
    // dummy columns within one variable sum to <= 1 per row
    for (Eigen::Index r = 0; r < dm.rows(); ++r) {
      std::map<int, double> per_var;
      for (std::size_t j = 0; j < dm.cols.size(); ++j)
        if (dm.cols[j].kind == DesignColKind::Dummy)
          per_var[dm.cols[j].var_index] += dm.X(r, static_cast<Eigen::Index>(j));
      for (auto& [vi, sum] : per_var) EXPECT_LE(sum, 1.0);
    }
  }
}

TEST(SplitMissingness, Definition) {
  Schema s({cont("x", {"-999"})});
  auto t = testutil::from_csv_text("x\n5\n-999\n7\n", s);
  auto sp = split_missingness(t, "x");
  EXPECT_EQ(sp.indicator, (std::vector<int>{0, 1, 0}));
  ASSERT_EQ(sp.observed_subtable.n_rows(), 2u);
  EXPECT_EQ(sp.observed_subtable.at(0, 0).value, 5.0);
  EXPECT_EQ(sp.observed_subtable.at(1, 0).value, 7.0);
}

TEST(SplitMissingness, NoMissingDegenerate) {
  Schema s({cont("x", {"-999"})});
  auto t = testutil::from_csv_text("x\n5\n7\n", s);
  auto sp = split_missingness(t, "x");
  EXPECT_EQ(sp.indicator, (std::vector<int>{0, 0}));
  EXPECT_EQ(sp.observed_subtable.n_rows(), 2u);
}

TEST(SplitMissingness, ErrorsWithoutDeclaredCodes) {
  Schema s({cont("x")});
  auto t = testutil::from_csv_text("x\n5\n", s);
  EXPECT_THROW(split_missingness(t, "x"), std::invalid_argument);
}

TEST(SplitMissingness, CountsPartitionRows) {
  Schema s({cont("x", {"-999"})});
  std::string csv = "x\n";
  std::mt19937 gen(3);
  std::size_t n = 1000, n_miss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool miss = gen() % 1000 < 2;
    if (miss) ++n_miss;
    csv += miss ? "-999\n" : std::to_string(i) + "\n";
  }
  auto t = testutil::from_csv_text(csv, s);
  auto sp = split_missingness(t, "x");
  std::size_t ones = 0;
  for (int v : sp.indicator) ones += static_cast<std::size_t>(v);
  EXPECT_EQ(ones, n_miss);
  EXPECT_EQ(ones + sp.observed_subtable.n_rows(), n);
}
