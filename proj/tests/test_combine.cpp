#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "synthlab/analyze.hpp"
#include "synthlab/combine.hpp"
#include "synthlab/rng.hpp"

using namespace synthlab;
using testutil::cat;
using testutil::cont;

namespace {

// Direct-substitution oracle, written from the definitions without reusing
// the library helpers.
struct Oracle {
  static double TM(double v, double b, int M) {
    return b + b / M - v;
  }
  static double Ts(double v, long k, long n, int M) {
    return v * k / static_cast<double>(n) + v / M;
  }
  static double TsPPD(double v, long k, long n, int M) {
    double kn = k / static_cast<double>(n);
    return v * kn + (v + v * kn) / M;
  }
  static double Tp(double v, double b, long k, long n, int M) {
    return v * k / static_cast<double>(n) + b / M;
  }
  static double TsDE(double v, long k, long n, int M, double de) {
    return v * de * k / static_cast<double>(n) + v / M;
  }
};

}  // namespace

TEST(Pool, TwoPointExample) {
  PerSynthesisEstimates per;
  per.q = {{1.0}, {3.0}};
  per.v = {{2.0}, {2.0}};
  per.M = 2;
  per.k = per.n = 100;
  PooledStats p = pool(per);
  EXPECT_DOUBLE_EQ(p.q_bar[0], 2.0);
  EXPECT_DOUBLE_EQ(p.v_bar[0], 2.0);
  ASSERT_TRUE(p.b.has_value());
  EXPECT_DOUBLE_EQ((*p.b)[0], 2.0);
}

TEST(Pool, EqualEstimatesGiveZeroBetween) {
  PerSynthesisEstimates per;
  per.q = {{0.7, -1.0}, {0.7, -1.0}, {0.7, -1.0}};
  per.v = {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
  per.M = 3;
  per.k = per.n = 50;
  PooledStats p = pool(per);
  EXPECT_DOUBLE_EQ((*p.b)[0], 0.0);
  EXPECT_DOUBLE_EQ((*p.b)[1], 0.0);
}

TEST(Pool, SingleReplicateLeavesBetweenUndefined) {
  PerSynthesisEstimates per;
  per.q = {{4.0}};
  per.v = {{1.0}};
  per.M = 1;
  per.k = per.n = 10;
  PooledStats p = pool(per);
  EXPECT_FALSE(p.b.has_value());
  EXPECT_DOUBLE_EQ(p.q_bar[0], 4.0);
}

TEST(VarTM, WorkedExamples) {
  bool neg = false;
  EXPECT_NEAR(var_TM(1.0, 1.2, 5, &neg), 0.44, 1e-15);
  EXPECT_FALSE(neg);
  EXPECT_NEAR(var_TM(1.0, 0.5, 5, &neg), -0.4, 1e-15);
  EXPECT_TRUE(neg);
  EXPECT_DOUBLE_EQ(var_TM(0.0, 0.7, 5), 0.7 * 1.2);
  EXPECT_THROW(var_TM(1.0, 1.0, 1), std::invalid_argument);
}

TEST(VarTs, WorkedExamples) {
  EXPECT_DOUBLE_EQ(var_Ts(3.0, 100, 100, 1), 6.0);          // k=n, M=1: 2v
  EXPECT_DOUBLE_EQ(var_Ts(1.0, 200, 100, 5), 2.2);          // k=2n, M=5
  // the ratios quoted for M=10, k=n
  EXPECT_NEAR(std::sqrt(var_Ts(1.0, 500, 500, 10)), 1.049, 0.001);
  EXPECT_NEAR(std::sqrt(var_TsPPD(1.0, 500, 500, 10)), 1.095, 0.001);
}

TEST(VarTp, WorkedExamples) {
  EXPECT_DOUBLE_EQ(var_Tp(1.0, 0.5, 100, 100, 5), 1.1);
  EXPECT_DOUBLE_EQ(var_Tp(2.5, 0.0, 300, 100, 4), 7.5);
  EXPECT_DOUBLE_EQ(var_Tp(2.0, 1.0, 50, 100, 10), 1.1);
  EXPECT_THROW(var_Tp(1.0, 1.0, 10, 10, 1), std::invalid_argument);
}

TEST(VarTsDE, WorkedExamples) {
  EXPECT_DOUBLE_EQ(var_TsDE(1.7, 80, 100, 7, 1.0), var_Ts(1.7, 80, 100, 7));
  EXPECT_DOUBLE_EQ(var_TsDE(0.5, 100, 100, 1, 2.0), 1.5);
  EXPECT_THROW(var_TsDE(1.0, 10, 10, 2, 0.0), std::invalid_argument);
}

TEST(VarTMAdjusted, FloorAndPassThrough) {
  bool adj = true;
  EXPECT_NEAR(var_TM_adjusted(1.0, 1.2, 100, 100, 5, &adj), 0.44, 1e-15);
  EXPECT_FALSE(adj);
  EXPECT_DOUBLE_EQ(var_TM_adjusted(1.0, 0.5, 100, 100, 5, &adj), 1.0);
  EXPECT_TRUE(adj);
  EXPECT_DOUBLE_EQ(var_TM_adjusted(1.0, 0.0, 100, 100, 5, &adj), 1.0);
  EXPECT_TRUE(adj);
}

TEST(Estimators, RandomTuplesMatchOracle) {
  RngStream rng(101);
  for (int i = 0; i < 1000; ++i) {
    double v = std::exp(rng.normal());
    double b = std::exp(rng.normal());
    int M = 2 + static_cast<int>(rng.uniform_index(50));
    long n = 10 + static_cast<long>(rng.uniform_index(100000));
    long k = 10 + static_cast<long>(rng.uniform_index(100000));
    double de = 0.1 + 30.0 * rng.uniform();
    auto close = [](double a, double o) {
      double scale = std::max({std::fabs(a), std::fabs(o), 1e-300});
      EXPECT_LT(std::fabs(a - o) / scale, 1e-12);
    };
    close(var_TM(v, b, M), Oracle::TM(v, b, M));
    close(var_Ts(v, k, n, M), Oracle::Ts(v, k, n, M));
    close(var_TsPPD(v, k, n, M), Oracle::TsPPD(v, k, n, M));
    close(var_Tp(v, b, k, n, M), Oracle::Tp(v, b, k, n, M));
    close(var_TsDE(v, k, n, M, de), Oracle::TsDE(v, k, n, M, de));
    // exact identities
    EXPECT_NEAR(var_TsPPD(v, k, n, M) - var_Ts(v, k, n, M),
                v * (static_cast<double>(k) / n) / M, 1e-12 * v);
    EXPECT_GE(var_Tp(v, b, k, n, M), 0.0);
  }
}

TEST(Combine, IntervalsSymmetricAndScaled) {
  PerSynthesisEstimates per;
  per.q = {{2.0}, {2.2}, {1.8}};
  per.v = {{0.5}, {0.5}, {0.5}};
  per.M = 3;
  per.k = per.n = 100;
  auto res = combine(pool(per), Estimator::Ts, 0.95);
  ASSERT_EQ(res.size(), 1u);
  const CombinedEstimate& c = res[0];
  EXPECT_DOUBLE_EQ(c.estimate, 2.0);
  EXPECT_NEAR(c.ci_high - c.estimate, c.estimate - c.ci_low, 1e-12);
  EXPECT_NEAR(c.ci_high - c.ci_low, 2 * 1.959963985 * std::sqrt(c.variance), 1e-6);
}

TEST(Combine, NegativeTMGetsNaInterval) {
  PerSynthesisEstimates per;
  per.q = {{1.0}, {1.001}};
  per.v = {{5.0}, {5.0}};
  per.M = 2;
  per.k = per.n = 100;
  auto res = combine(pool(per), Estimator::TM);
  EXPECT_TRUE(res[0].negative_variance);
  EXPECT_LT(res[0].variance, 0.0);
  EXPECT_TRUE(std::isnan(res[0].ci_low));
  EXPECT_TRUE(std::isnan(res[0].ci_high));
}

TEST(Combine, BetweenRequiredEstimatorsRejectSingleReplicate) {
  PerSynthesisEstimates per;
  per.q = {{1.0}};
  per.v = {{2.0}};
  per.M = 1;
  per.k = per.n = 100;
  PooledStats p = pool(per);
  EXPECT_THROW(combine(p, Estimator::TM), std::invalid_argument);
  EXPECT_THROW(combine(p, Estimator::Tp), std::invalid_argument);
  EXPECT_NO_THROW(combine(p, Estimator::Ts));
  EXPECT_NO_THROW(combine(p, Estimator::VBarOnly));
}

TEST(Formula, ParsesTermsAndInteractions) {
  AnalysisSpec s = parse_formula("y ~ a + b + a:b");
  EXPECT_EQ(s.response, "y");
  ASSERT_EQ(s.terms.size(), 3u);
  EXPECT_EQ(s.terms[2], (std::vector<std::string>{"a", "b"}));
  AnalysisSpec star = parse_formula("y ~ a*b");
  ASSERT_EQ(star.terms.size(), 3u);
  EXPECT_EQ(star.terms[0], (std::vector<std::string>{"a"}));
  EXPECT_EQ(star.terms[2], (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(parse_formula("y a + b"), std::invalid_argument);
  EXPECT_THROW(parse_formula("y ~ "), std::invalid_argument);
  EXPECT_THROW(parse_formula("y ~ a + + b"), std::invalid_argument);
}

TEST(Formula, BinarizedResponseNeedsLogistic) {
  AnalysisSpec s = parse_formula("g == 'yes' ~ x", ModelKind::Logistic);
  EXPECT_EQ(s.response, "g");
  EXPECT_EQ(s.response_level, "yes");
  EXPECT_THROW(parse_formula("g == yes ~ x", ModelKind::Linear),
               std::invalid_argument);
}

TEST(AnalysisDesign, DummiesInteractionsAndCompleteCases) {
  Schema sc({cont("y"), cont("x", {"NA"}), cat("g", {"a", "b", "c"})});
  DataTable t = testutil::from_csv_text(
      "y,x,g\n1,2,a\n2,NA,b\n3,4,c\n4,5,b\n", sc);
  AnalysisSpec s = parse_formula("y ~ x + g + x:g");
  AnalysisDesign d = build_analysis_design(t, s);
  // row with NA dropped
  EXPECT_EQ(d.y.size(), 3u);
  ASSERT_EQ(d.names.size(), 6u);
  EXPECT_EQ(d.names[0], "(intercept)");
  EXPECT_EQ(d.names[2], "g=b");
  EXPECT_EQ(d.names[4], "x:g=b");
  // third kept row: x=5, g=b
  EXPECT_DOUBLE_EQ(d.X(2, 1), 5.0);
  EXPECT_DOUBLE_EQ(d.X(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(d.X(2, 3), 0.0);
  EXPECT_DOUBLE_EQ(d.X(2, 4), 5.0);
  EXPECT_DOUBLE_EQ(d.X(2, 5), 0.0);
}

TEST(FitModel, LinearRecoversExactLine) {
  Schema sc({cont("y"), cont("x")});
  RngStream rng(7);
  std::vector<Column> cols(2);
  for (int i = 0; i < 50; ++i) {
    double x = rng.normal();
    cols[1].push_back(Cell::of(x));
    cols[0].push_back(Cell::of(1.0 + 2.0 * x));
  }
  DataTable t(sc, cols);
  ModelFit f = fit_model(t, parse_formula("y ~ x"));
  EXPECT_NEAR(f.coef[0], 1.0, 1e-10);
  EXPECT_NEAR(f.coef[1], 2.0, 1e-10);
  EXPECT_NEAR(f.var[0], 0.0, 1e-18);
}

TEST(FitModel, LogisticRecoversTruth) {
  Schema sc({cat("g", {"no", "yes"}), cont("x")});
  RngStream rng(11);
  std::vector<Column> cols(2);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    double p = 1.0 / (1.0 + std::exp(-(-1.0 + 2.0 * x)));
    cols[0].push_back(Cell::of(rng.uniform() < p ? 1.0 : 0.0));
    cols[1].push_back(Cell::of(x));
  }
  DataTable t(sc, cols);
  ModelFit f = fit_model(t, parse_formula("g ~ x", ModelKind::Logistic));
  EXPECT_NEAR(f.coef[0], -1.0, 4 * std::sqrt(f.var[0]));
  EXPECT_NEAR(f.coef[1], 2.0, 4 * std::sqrt(f.var[1]));
}

TEST(AnalyzeSynthetic, IdenticalReplicatesCollapse) {
  Schema sc({cont("y"), cont("x")});
  RngStream rng(13);
  std::vector<Column> cols(2);
  for (int i = 0; i < 200; ++i) {
    double x = rng.normal();
    cols[1].push_back(Cell::of(x));
    cols[0].push_back(Cell::of(0.5 + x + rng.normal()));
  }
  DataTable t(sc, cols);
  std::vector<DataTable> reps{t, t, t};
  auto res = analyze_synthetic(reps, parse_formula("y ~ x"), Estimator::TM, 200);
  ModelFit single = fit_model(t, parse_formula("y ~ x"));
  for (std::size_t j = 0; j < res.size(); ++j) {
    EXPECT_DOUBLE_EQ(res[j].estimate, single.coef[j]);
    // b = 0 so T_M = -v_bar < 0
    EXPECT_TRUE(res[j].negative_variance);
  }
}

TEST(AnalyzeSynthetic, SingleReplicateEstimatorRules) {
  Schema sc({cont("y"), cont("x")});
  RngStream rng(17);
  std::vector<Column> cols(2);
  for (int i = 0; i < 300; ++i) {
    double x = rng.normal();
    cols[1].push_back(Cell::of(x));
    cols[0].push_back(Cell::of(x + rng.normal()));
  }
  DataTable t(sc, cols);
  std::vector<DataTable> reps{t};
  EXPECT_THROW(analyze_synthetic(reps, parse_formula("y ~ x"), Estimator::TM, 300),
               std::invalid_argument);
  auto vb = analyze_synthetic(reps, parse_formula("y ~ x"), Estimator::VBarOnly, 300);
  auto ts = analyze_synthetic(reps, parse_formula("y ~ x"), Estimator::Ts, 300);
  ModelFit single = fit_model(t, parse_formula("y ~ x"));
  for (std::size_t j = 0; j < vb.size(); ++j) {
    EXPECT_DOUBLE_EQ(vb[j].variance, single.var[j]);
    // k=n, M=1: T_s doubles the variance, SE scales by sqrt(2)
    EXPECT_NEAR(ts[j].variance, 2.0 * single.var[j], 1e-14);
  }
}

TEST(AnalyzeSynthetic, ReplicateFitFailureIsAttributed) {
  Schema sc({cont("y"), cont("x")});
  DataTable good = testutil::from_csv_text("y,x\n1,1\n2,2\n3,3\n4,5\n", sc);
  DataTable bad = testutil::from_csv_text("y,x\n1,2\n2,2\n3,2\n4,2\n", sc);
  std::vector<DataTable> reps{good, bad};
  try {
    analyze_synthetic(reps, parse_formula("y ~ x"), Estimator::Ts, 4);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("replicate 2"), std::string::npos);
  }
}
