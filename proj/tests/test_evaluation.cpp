#include <doctest.h>

#include "testutil.hpp"

#include <cmath>

#include "oracle/stats_cases.inc"
#include "xlsent/errors.hpp"
#include "xlsent/evaluation.hpp"
#include "xlsent/rng.hpp"

using namespace xlsent;

namespace {

// Independent brute-force macro F1 straight from precision/recall per class.
double brute_force_macro_f1(const std::vector<SentimentLabel>& golds,
                            const std::vector<SentimentLabel>& preds) {
  double sum = 0.0;
  int kept = 0;
  for (int c = 0; c < 3; ++c) {
    long tp = 0, fp = 0, fn = 0, gold_count = 0, pred_count = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      const bool g = static_cast<int>(golds[i]) == c;
      const bool p = static_cast<int>(preds[i]) == c;
      if (g) ++gold_count;
      if (p) ++pred_count;
      if (g && p) ++tp;
      if (!g && p) ++fp;
      if (g && !p) ++fn;
    }
    if (gold_count == 0 && pred_count == 0) continue;
    const double precision = pred_count == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = gold_count == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    sum += (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    ++kept;
  }
  return sum / static_cast<double>(kept);
}

std::vector<SentimentLabel> random_labels(Rng& rng, std::size_t n) {
  std::vector<SentimentLabel> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<SentimentLabel>(rng.next_below(3)));
  return labels;
}

}  // namespace

TEST_CASE("macro F1 reference cases") {
  const std::vector<SentimentLabel> golds = {SentimentLabel::negative, SentimentLabel::neutral,
                                             SentimentLabel::positive};
  CHECK(macro_f1(golds, golds) == TApprox(1.0));

  // one of each class, everything predicted neutral: (0 + 0.5 + 0) / 3
  const std::vector<SentimentLabel> all_neutral(3, SentimentLabel::neutral);
  CHECK(macro_f1(golds, all_neutral) == TApprox(1.0 / 6.0).margin(1e-12));

  // classes absent from both sides are skipped
  CHECK(macro_f1(all_neutral, all_neutral) == TApprox(1.0));

  CHECK_THROWS_AS(macro_f1(golds, all_neutral.empty() ? all_neutral : std::vector<SentimentLabel>{}),
                  DataError);
}

TEST_CASE("macro F1 agrees with the brute-force oracle on random instances") {
  Rng rng(2718);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng.next_below(40);
    const auto golds = random_labels(rng, n);
    const auto preds = random_labels(rng, n);
    CHECK(macro_f1(golds, preds) == TApprox(brute_force_macro_f1(golds, preds)).margin(1e-12));
  }
}

TEST_CASE("macro F1 is invariant under joint permutation") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.next_below(30);
    const auto golds = random_labels(rng, n);
    const auto preds = random_labels(rng, n);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<SentimentLabel> golds_p, preds_p;
    for (std::size_t i : perm) {
      golds_p.push_back(golds[i]);
      preds_p.push_back(preds[i]);
    }
    CHECK(macro_f1(golds, preds) == TApprox(macro_f1(golds_p, preds_p)).margin(1e-14));
  }
}

TEST_CASE("weighted averaging option") {
  // 4 negatives predicted perfectly, 1 positive predicted wrong:
  // macro = (1 + 0)/2, weighted = (4*1 + 1*0)/5
  std::vector<SentimentLabel> golds(4, SentimentLabel::negative);
  golds.push_back(SentimentLabel::positive);
  std::vector<SentimentLabel> preds(5, SentimentLabel::negative);
  CHECK(f1_score(golds, preds, F1Average::macro) < f1_score(golds, preds, F1Average::weighted));
}

TEST_CASE("aggregate_folds mean and sample standard deviation") {
  const auto [m1, s1] = aggregate_folds({0.7, 0.7, 0.7});
  CHECK(m1 == TApprox(0.7));
  CHECK(s1 == TApprox(0.0));

  const auto [m2, s2] = aggregate_folds({0.6, 0.8});
  CHECK(m2 == TApprox(0.7).margin(1e-15));
  CHECK(s2 == TApprox(0.14142135623730953).margin(1e-12));

  CHECK_THROWS_AS(aggregate_folds({0.5}), DataError);
}

TEST_CASE("paired t-test reference and guards") {
  SUBCASE("identical sequences") {
    const TTestResult r = paired_t_test({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
  }
  SUBCASE("constant non-zero difference is degenerate") {
    CHECK_THROWS_WITH_AS(paired_t_test({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0}),
                         "paired_t_test: zero variance of differences", NumericalError);
  }
  SUBCASE("reference values") {
    const TTestResult r = paired_t_test({1.0, 2.0, 3.0, 4.0}, {1.1, 2.3, 2.8, 4.4});
    CHECK(r.t == TApprox(-1.1338934190276813).margin(1e-9));
    CHECK(r.p == TApprox(0.339254050856455).margin(1e-9));
  }
  SUBCASE("antisymmetry") {
    const std::vector<double> a = {0.3, 0.9, 0.1, 0.7};
    const std::vector<double> b = {0.5, 0.2, 0.4, 0.6};
    const TTestResult ab = paired_t_test(a, b);
    const TTestResult ba = paired_t_test(b, a);
    CHECK(ab.t == -ba.t);
    CHECK(ab.p == ba.p);
  }
  SUBCASE("length guards") {
    CHECK_THROWS_AS(paired_t_test({1.0}, {2.0}), DataError);
    CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {2.0}), DataError);
  }
}

TEST_CASE("paired t-test matches the external oracle on 50 random sequences") {
  for (const TTestOracleCase& c : kTTestOracle) {
    const TTestResult r = paired_t_test(c.a, c.b);
    CHECK(r.t == TApprox(c.t).margin(1e-6));
    CHECK(r.p == TApprox(c.p).margin(1e-6));
  }
}

TEST_CASE("language ordering mirrors the report column convention") {
  CHECK(language_report_rank("sr") == 0);
  CHECK(language_report_rank("Serbian") == 0);
  CHECK(language_report_rank("sq") == 1);
  CHECK(language_report_rank("bs") == 2);
  CHECK(language_report_rank("et") == 3);
  CHECK(language_report_rank("hr") == 4);
  CHECK(language_report_rank("mk") == 5);
  CHECK(language_report_rank("fr") == 6);
}

TEST_CASE("eval report CSV shape") {
  EvalReport report;
  report.regime = "base";
  report.translation = false;
  EvalEntry e;
  e.language = "sr";
  e.mean_f1 = 71.02;
  e.std_f1 = 3.71;
  e.fold_scores = {70.0, 72.04};
  report.entries.push_back(e);
  const std::string csv = report.to_csv();
  CHECK(csv.rfind("regime,translation,language,mean_f1,std_f1,fold_0,fold_1", 0) == 0);
  CHECK(csv.find("base,no,sr,71.02,3.71,70.00,72.04") != std::string::npos);
  CHECK(report.to_table().find("71.02 ± 3.71") != std::string::npos);
}
