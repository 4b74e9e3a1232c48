#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"
#include "tipcast/errors.hpp"
#include "tipcast/eval.hpp"
#include "tipcast/io.hpp"

using namespace tipcast;

namespace {

std::string stub_command() { return std::string(TIPCAST_PYTHON) + " " + TIPCAST_STUB_DL; }

}  // namespace

TEST_CASE("relative error examples") {
  CHECK(relative_error(1.0, 1.0, 0.0) == 0.0);
  CHECK(relative_error(1.5, 1.0, 0.0) == 0.5);
  CHECK(relative_error(0.5, 1.0, 0.0) == 0.5);
  CHECK_THROWS_AS(relative_error(0.5, 1.0, 1.0), ArgumentError);
}

TEST_CASE("relative error is invariant under affine reparameterization") {
  Rng rng = make_rng(1, {});
  for (int i = 0; i < 100; ++i) {
    const double h = uniform_real(rng, -3, 3), c = uniform_real(rng, -3, 3), e = uniform_real(rng, -3, 3);
    const double a = uniform_real(rng, 0.1, 5) * (i % 2 ? -1 : 1), b = uniform_real(rng, -10, 10);
    CHECK(relative_error(a * h + b, a * c + b, a * e + b) ==
          doctest::Approx(relative_error(h, c, e)).epsilon(1e-9));
  }
}

TEST_CASE("failures are clipped and flagged") {
  const PredictionResult r = score(Method::bb, std::nullopt, 1.0, 0.5);
  CHECK(r.failed());
  CHECK(r.epsilon == kEpsilonMax);
  CHECK(score(Method::bb, std::nan(""), 1.0, 0.5).failed());
}

TEST_CASE("aggregate statistics") {
  std::vector<PredictionResult> same(50, score(Method::df, 1.2, 1.0, 0.0));
  const Aggregate a = aggregate(same);
  CHECK(a.mean == doctest::Approx(0.2));
  CHECK(a.ci_lo == a.ci_hi);

  std::vector<PredictionResult> half;
  for (int i = 0; i < 25; ++i) {
    half.push_back(score(Method::df, 1.0, 1.0, 0.0));
    half.push_back(score(Method::df, 2.0, 1.0, 0.0));
  }
  CHECK(aggregate(half).mean == doctest::Approx(0.5));

  // Uniform epsilon: order statistics put the 5th/95th percentiles at 0.05/0.95.
  Rng rng = make_rng(2, {});
  std::vector<PredictionResult> u;
  for (int i = 0; i < 10000; ++i) u.push_back(score(Method::dev, uniform_real(rng, 1.0, 2.0), 1.0, 0.0));
  const Aggregate au = aggregate(u);
  CHECK(au.ci_lo == doctest::Approx(0.05).epsilon(0.01).scale(1.0));
  CHECK(au.ci_hi == doctest::Approx(0.95).epsilon(0.01).scale(1.0));

  std::vector<PredictionResult> perm = u;
  std::shuffle(perm.begin(), perm.end(), rng);
  const Aggregate ap = aggregate(perm);
  CHECK(ap.mean == au.mean);
  CHECK(ap.ci_lo == au.ci_lo);

  std::vector<PredictionResult> with_fail = {score(Method::bb, std::nullopt, 1, 0), score(Method::bb, 1.0, 1, 0)};
  const Aggregate af = aggregate(with_fail);
  CHECK(af.n_fail == 1);
  CHECK(af.mean == doctest::Approx(1.0));
  CHECK_THROWS_AS(aggregate(std::vector<PredictionResult>(1)), ArgumentError);
}

TEST_CASE("method lists") {
  const auto m = parse_methods("df,bb,dev,null");
  CHECK(m.size() == 4);
  CHECK(m[3] == Method::null);
  CHECK_THROWS_AS(parse_methods("df,lstm"), ArgumentError);
  CHECK_THROWS_AS(parse_methods("df,df"), ArgumentError);
}

TEST_CASE("prediction CSV round-trip and validation") {
  const auto dir = test::scratch_dir("pred_csv");
  const std::vector<double> v = {1.5, 2.25, 0.1 + 0.2};
  write_prediction_csv(dir / "p.csv", v);
  CHECK(read_prediction_csv(dir / "p.csv", 3) == v);
  CHECK_THROWS_AS(read_prediction_csv(dir / "p.csv", 4), DataError);
  {
    std::ofstream f(dir / "bad.csv");
    f << "index,label_norm_hat\n0,1\n0,2\n";
  }
  CHECK_THROWS_AS(read_prediction_csv(dir / "bad.csv", 2), DataError);
}

TEST_CASE("dl bridge round-trips through an external process") {
  const auto dir = test::scratch_dir("bridge");
  {
    std::ofstream f(dir / "model.txt");
    f << "1.75\n";
  }
  std::vector<TrainingInstance> inst;
  std::vector<double> mu(300), x(300);
  for (int i = 0; i < 300; ++i) {
    mu[i] = 0.001 * i;
    x[i] = std::sin(0.1 * i);
  }
  for (int k = 0; k < 3; ++k) inst.push_back(encode_test_instance(mu, x, 0.5));
  write_instances_file(dir / "in.csv", inst);
  const auto out = run_dl_bridge({stub_command(), (dir / "model.txt").string()}, dir / "in.csv",
                                 dir / "out.csv", 3);
  REQUIRE(out.size() == 3);
  CHECK(out[1] == 1.75);
  // The scalar de-normalizes with the same formula as in-process labels.
  CHECK(std::abs(denormalize_label(out[0], mu.front(), mu.back()) - (mu.front() + 1.75 * (mu.back() - mu.front()))) <= 1e-9);
  CHECK_THROWS_AS(run_dl_bridge({stub_command(), (dir / "missing.txt").string()}, dir / "in.csv",
                                dir / "out.csv", 3),
                  ExternalToolError);
  CHECK_THROWS_AS(run_dl_bridge({"", "m"}, dir / "in.csv", dir / "out.csv", 3), ArgumentError);
}

TEST_CASE("compare_methods produces one row per initial value and method") {
  TestSuiteConfig tc;
  tc.model = ModelId::may_fold;
  tc.n_series = 4;
  tc.seed = 2;
  const TestSuite suite = generate_test_suite(tc);
  CompareConfig cc;
  cc.null_label_mean = 2.0;
  const std::vector<Method> methods = {Method::df, Method::bb, Method::dev, Method::null};
  const Comparison a = compare_methods(suite, methods, cc);
  CHECK(a.rows.size() == 11 * methods.size());
  CHECK(a.predictions.size() == suite.series.size() * methods.size());
  for (const auto& r : a.rows) {
    CHECK(std::isfinite(r.stats.mean));
    CHECK(r.stats.ci_lo <= r.stats.ci_hi);
  }
  // null predicts mu_first + 2 (mu_end - mu_first), so eps = |1 - d| / d.
  for (const auto& p : a.predictions) {
    if (p.result.method != Method::null) continue;
    const auto& s = suite.series[p.initial_index * 4 + p.series_index];
    const double d = (suite.mu_c - s.mu.back()) / (s.mu.back() - s.mu.front());
    CHECK(p.result.epsilon == doctest::Approx(std::abs(1 - d) / d).epsilon(1e-9));
  }
  std::ostringstream c1, c2;
  write_comparison_csv(c1, a.rows);
  cc.jobs = 3;
  const Comparison b = compare_methods(suite, methods, cc);
  write_comparison_csv(c2, b.rows);
  CHECK(c1.str() == c2.str());
  CHECK(c1.str().rfind("model,initial_value,method,mean_eps,ci_lo,ci_hi,n_fail\n", 0) == 0);

  std::ostringstream plot;
  write_plotdata_csv(plot, a.rows);
  const std::string plot_text = plot.str();
  CHECK(std::count(plot_text.begin(), plot_text.end(), '\n') == 12);

  CHECK_THROWS_AS(compare_methods(suite, {Method::null}, CompareConfig{}), ArgumentError);
  CHECK_THROWS_AS(compare_methods(suite, {Method::dl}, CompareConfig{}), ArgumentError);
}

TEST_CASE("compare_methods scores the dl bridge") {
  const auto dir = test::scratch_dir("compare_dl");
  {
    std::ofstream f(dir / "model.txt");
    f << "1.5\n";
  }
  TestSuiteConfig tc;
  tc.model = ModelId::may_fold;
  tc.n_series = 2;
  tc.initial_values = {0.0, 0.1};
  const TestSuite suite = generate_test_suite(tc);
  CompareConfig cc;
  cc.dl = DlBridge{stub_command(), (dir / "model.txt").string()};
  cc.work_dir = dir;
  cc.null_label_mean = 1.5;
  const Comparison c = compare_methods(suite, {Method::dl, Method::null}, cc);
  for (std::size_t i = 0; i < c.predictions.size(); i += 2) {
    CHECK(c.predictions[i].result.mu_hat == c.predictions[i + 1].result.mu_hat);
  }
}

TEST_CASE("baselines on a noisy approach to a fold produce finite predictions") {
  TestSuiteConfig tc;
  tc.model = ModelId::may_fold;
  tc.n_series = 10;
  tc.initial_values = {0.15};
  tc.seed = 4;
  const TestSuite suite = generate_test_suite(tc);
  int ok = 0;
  for (std::size_t k = 0; k < suite.series.size(); ++k) {
    std::vector<std::vector<double>> cols = {suite.observed_series(k)};
    const auto r = predict_baseline(Method::df, suite.series[k].mu, cols, 0);
    if (r) {
      ++ok;
      CHECK(std::isfinite(*r));
    }
  }
  CHECK(ok > 0);
}
