#include <doctest.h>

#include <cmath>

#include "dbn/error.hpp"
#include "dbn/metrics/export.hpp"
#include "dbn/metrics/metrics.hpp"
#include "dbn/rng.hpp"
#include "support/oracles.hpp"

using namespace dbn;
using namespace dbn::metrics;

namespace {

ConfusionMatrix example_cm() {
  const std::vector<std::size_t> t{0, 0, 1, 1, 2, 2}, p{0, 1, 1, 1, 0, 2};
  return confusion_matrix(t, p, 3, {"a", "b", "c"});
}

Matrix binary_scores(const std::vector<double>& p1) {
  Matrix m(p1.size(), 2);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    m(i, 0) = 1.0 - p1[i];
    m(i, 1) = p1[i];
  }
  return m;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("confusion matrix and per-class metrics") {
  const auto cm = example_cm();
  CHECK(cm(0, 0) == 1);
  CHECK(cm(0, 1) == 1);
  CHECK(cm(1, 1) == 2);
  CHECK(cm(2, 0) == 1);
  CHECK(cm(2, 2) == 1);
  CHECK(cm.total() == 6);
  CHECK(cm.trace() == 4);
  const auto m = class_metrics(cm);
  CHECK(m[0].precision == 0.5);
  CHECK(m[0].recall == 0.5);
  CHECK(m[1].precision == doctest::Approx(2.0 / 3.0));
  CHECK(m[1].recall == 1.0);
  CHECK(m[1].f1 == doctest::Approx(0.8));
  CHECK(m[2].precision == 1.0);
  CHECK(m[2].recall == 0.5);
  CHECK(m[2].support == 2);
  CHECK(aggregate(m, cm).accuracy == doctest::Approx(4.0 / 6.0));

  CHECK(confusion_matrix(std::vector<std::size_t>{0}, std::vector<std::size_t>{1}, 2).class_names()[1] == "class_1");
  CHECK_THROWS_AS(confusion_matrix(std::vector<std::size_t>{0}, std::vector<std::size_t>{2}, 2), ConfigError);
  CHECK_THROWS_AS(confusion_matrix(std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{1}, 2), ConfigError);
}

TEST_CASE("0/0 precision and recall are 0") {
  ConfusionMatrix cm(2);
  cm(0, 0) = 3;
  const auto m = class_metrics(cm);
  CHECK(m[1].precision == 0.0);
  CHECK(m[1].recall == 0.0);
  CHECK(m[1].f1 == 0.0);
  CHECK(f1_score(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(aggregate(class_metrics(ConfusionMatrix(2)), ConfusionMatrix(2)), ConfigError);
}

TEST_CASE("binary case: precision 0.75") {
  // 3 true positives, 1 false positive, 1 false negative.
  const std::vector<std::size_t> t{1, 1, 1, 0, 1, 0, 0}, p{1, 1, 1, 1, 0, 0, 0};
  const auto m = class_metrics(confusion_matrix(t, p, 2));
  CHECK(m[1].precision == 0.75);
  CHECK(m[1].recall == 0.75);
  CHECK(m[1].f1 == doctest::Approx(0.75));
}

TEST_CASE("averages") {
  const auto m = class_metrics(example_cm());
  const auto macro = macro_average(m);
  CHECK(macro.precision == doctest::Approx((0.5 + 2.0 / 3.0 + 1.0) / 3.0));
  CHECK(macro.f1 == doctest::Approx((m[0].f1 + m[1].f1 + m[2].f1) / 3.0));
  // Equal supports: weighted equals macro.
  const auto w = weighted_average(m);
  CHECK(w.precision == doctest::Approx(macro.precision));
  CHECK(w.recall == doctest::Approx(macro.recall));
  CHECK(w.f1 == doctest::Approx(macro.f1));
}

TEST_CASE("AUC examples") {
  const std::vector<std::size_t> y{0, 0, 1, 1};
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const auto c = roc_curve(s, y, 1);
  CHECK(auc(c) == 0.75);
  CHECK(c.thresholds.front() == std::numeric_limits<double>::infinity());
  CHECK(c.tpr(0) == 0.0);
  CHECK(c.fpr(c.size() - 1) == 1.0);
  CHECK(auc(roc_curve(std::vector<double>{0.5, 0.5, 0.5, 0.5}, y, 1)) == 0.5);
  CHECK(auc(roc_curve(std::vector<double>{0.1, 0.2, 0.8, 0.9}, y, 1)) == 1.0);
  CHECK(trapezoid_auc(std::vector<double>{0, 0.5, 1}, std::vector<double>{0, 1, 1}) == 0.75);
  CHECK_THROWS_AS(roc_curve(std::vector<double>{0.1, 0.2}, std::vector<std::size_t>{1, 1}, 1), ConfigError);
  CHECK_THROWS_AS(roc_curve(std::vector<double>{NAN, 0.2}, std::vector<std::size_t>{0, 1}, 1), ConfigError);
}

TEST_CASE("AUC equals the rank statistic and is invariant to monotone transforms") {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 4 + rng.below(60);
    std::vector<double> s(n);
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = double(rng.below(8)) / 8.0;
      y[i] = i < 2 ? i : rng.below(2);
    }
    const double a = auc(roc_curve(s, y, 1));
    CHECK(a == oracle::rank_auc(s, y, 1));
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(3.0 * s[i]) - 7.0;
    CHECK(auc(roc_curve(e, y, 1)) == a);
  }
}

TEST_CASE("classification report") {
  const std::vector<std::size_t> y{0, 0, 1, 1, 1};
  const auto r = classification_report(y, binary_scores({0.1, 0.6, 0.7, 0.8, 0.4}), {"neg", "pos"});
  CHECK(r.total == 5);
  CHECK(r.accuracy == doctest::Approx(0.6));
  // Accuracy is the micro-averaged recall.
  double tp = 0;
  for (const auto& c : r.classes) tp += double(c.tp);
  CHECK(r.accuracy == tp / double(r.total));
  CHECK(r.has_curve == std::vector<bool>{true, true});
  CHECK(r.auc[1] == doctest::Approx(5.0 / 6.0));
  CHECK(r.auc[0] == r.auc[1]);
  CHECK(argmax_rows(Matrix(1, 3, std::vector<double>{0.4, 0.4, 0.2})) == std::vector<std::size_t>{0});

  // A class absent from y_true has no curve and is left out of macro AUC.
  Matrix three(3, 3, std::vector<double>{0.8, 0.1, 0.1, 0.2, 0.7, 0.1, 0.6, 0.3, 0.1});
  const auto r3 = classification_report(std::vector<std::size_t>{0, 1, 0}, three, {"a", "b", "c"});
  CHECK_FALSE(r3.has_curve[2]);
  CHECK(std::isnan(r3.auc[2]));
  CHECK(r3.macro_auc == doctest::Approx((r3.auc[0] + r3.auc[1]) / 2));

  CHECK_THROWS_AS(classification_report(y, Matrix(5, 2, 0.3), {"a", "b"}), ConfigError);
}

TEST_CASE("exports") {
  const std::vector<std::size_t> y{0, 1, 2, 0, 1, 2};
  Matrix s(6, 3, 0.1);
  for (std::size_t i = 0; i < 6; ++i) s(i, (i + (i == 5)) % 3) = 0.8;
  const auto r = classification_report(y, s, {"x", "y", "z"});

  const auto csv = report_csv(r);
  CHECK(csv.rfind("class,precision,recall,f1,support,auc\nx,", 0) == 0);
  const auto macro = csv.find("\nmacro avg,"), weighted = csv.find("\nweighted avg,"), acc = csv.find("\naccuracy,");
  CHECK(csv.find("\nz,") < macro);
  CHECK(macro < weighted);
  CHECK(weighted < acc);
  CHECK(count(csv, "\n") == 7);

  const auto svg = roc_svg(r);
  CHECK(count(svg, "<polyline") == 3);
  CHECK(svg.find("AUC") != std::string::npos);
  const auto cm_svg = confusion_svg(r.confusion);
  CHECK(count(cm_svg, "<rect") >= 9);
  CHECK(confusion_csv(r.confusion).rfind("true\\pred,x,y,z\nx,2,0,0\n", 0) == 0);
  CHECK(roc_csv(r.curves[0]).rfind("fpr,tpr\n0.000000,0.000000\n", 0) == 0);
  CHECK(fmt3(NAN) == "n/a");
  CHECK(fmt3(0.88625) == "0.886");
  CHECK(report_text(r).find("macro avg") != std::string::npos);
}
