#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "tipcast/errors.hpp"
#include "tipcast/preprocess.hpp"

using namespace tipcast;

namespace {

// Direct O(n^2) local linear regression with tricube weights over the k nearest points.
std::vector<double> lowess_reference(const std::vector<double>& y, const std::vector<double>& x,
                                     double span) {
  const std::size_t n = x.size();
  const auto k = static_cast<std::size_t>(std::floor(span * n + 1e-10));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      return std::abs(x[a] - x[i]) < std::abs(x[b] - x[i]);
    });
    idx.resize(k);
    double h = 0.0;
    for (auto j : idx) h = std::max(h, std::abs(x[j] - x[i]));
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto j : idx) {
      const double u = std::abs(x[j] - x[i]) / h;
      const double w = u < 1 ? std::pow(1 - u * u * u, 3) : 0.0;
      sw += w;
      sx += w * x[j];
      sy += w * y[j];
      sxx += w * x[j] * x[j];
      sxy += w * x[j] * y[j];
    }
    const double xm = sx / sw, ym = sy / sw;
    const double var = sxx / sw - xm * xm;
    const double slope = var > 0 ? (sxy / sw - xm * ym) / var : 0.0;
    out[i] = ym + slope * (x[i] - xm);
  }
  return out;
}

Trajectory ramp_trajectory(std::size_t n, double mu0, double mu1) {
  Trajectory t;
  t.dt = 0.01;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mu0 + (mu1 - mu0) * static_cast<double>(i) / static_cast<double>(n - 1);
    t.t.push_back(0.01 * i);
    t.mu.push_back(m);
    t.x.push_back(make_state({std::sin(7 * m) + 0.1 * m}));
  }
  return t;
}

}  // namespace

TEST_CASE("lowess matches a direct weighted regression") {
  Rng rng = make_rng(1, {});
  std::vector<double> x(300), y(300);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += uniform_real(rng, 0.01, 1.0);
    x[i] = acc;
    y[i] = std::sin(0.05 * acc) + uniform_real(rng, -0.1, 0.1);
  }
  const auto fit = lowess_fit(y, x, 0.2);
  const auto ref = lowess_reference(y, x, 0.2);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(fit[i] == doctest::Approx(ref[i]).epsilon(1e-9));
}

TEST_CASE("lowess reproduces straight lines and handles decreasing positions") {
  std::vector<double> x, y;
  for (int i = 0; i < 100; ++i) {
    x.push_back(1.0 - 0.01 * i * i / 100.0);
    y.push_back(3.0 - 2.0 * x.back());
  }
  const auto r = lowess_detrend(y, x, 0.2);
  for (double v : r) CHECK(std::abs(v) < 1e-12);
  std::vector<double> bad = x;
  std::swap(bad[10], bad[20]);
  CHECK_THROWS_AS(lowess_fit(y, bad, 0.2), ArgumentError);
  CHECK_THROWS_AS(lowess_fit(y, std::vector<double>(100, 1.0), 0.2), ArgumentError);
}

TEST_CASE("irregular sampling stays in the window and keeps ramp order") {
  const Trajectory t = ramp_trajectory(5000, 0.0, 1.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng = make_rng(s, {});
    const RawSample r = irregular_sample(t, 0.1, 0.8, rng);
    REQUIRE(r.mu_seq.size() == kInstanceLength);
    CHECK(r.draw_count >= 505);
    CHECK(r.draw_count <= 1000);
    CHECK(std::is_sorted(r.grid_index.begin(), r.grid_index.end()));
    CHECK(std::adjacent_find(r.grid_index.begin(), r.grid_index.end()) == r.grid_index.end());
    CHECK(r.mu_seq.front() >= 0.1);
    CHECK(r.mu_seq.back() < 0.8);
  }
  Rng rng = make_rng(0, {});
  const RawSample down = irregular_sample(ramp_trajectory(5000, 1.0, 0.0), 0.9, 0.2, rng);
  CHECK(down.mu_seq.front() <= 0.9);
  CHECK(down.mu_seq.back() > 0.2);
  CHECK(std::is_sorted(down.mu_seq.rbegin(), down.mu_seq.rend()));
  CHECK_THROWS_AS(irregular_sample(t, 0.1, 0.15, rng), DataError);
}

TEST_CASE("normalization maps the kept span to [0, 1] and unit mean residual") {
  Rng rng = make_rng(2, {});
  std::vector<double> mu(500), res(500);
  for (int i = 0; i < 500; ++i) {
    mu[i] = 0.2 + 0.001 * i;
    res[i] = std::cos(0.3 * i);
  }
  const TrainingInstance inst = zero_and_normalize_with_prefix(res, mu, 1.1, 100);
  CHECK(inst.prefix == 100);
  for (int i = 0; i < 100; ++i) {
    CHECK(inst.residual[i] == 0.0);
    CHECK(inst.mu_norm[i] == 0.0);
  }
  CHECK(inst.mu_norm[100] == 0.0);
  CHECK(inst.mu_norm[499] == 1.0);
  double m = 0.0;
  for (int i = 100; i < 500; ++i) m += std::abs(inst.residual[i]);
  CHECK(m / 400 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inst.label_norm == doctest::Approx((1.1 - 0.3) / (0.699 - 0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(zero_and_normalize_with_prefix(std::vector<double>(500, 0.0), mu, 1.1, 0), DataError);
}

TEST_CASE("denormalization inverts the label on random instances") {
  Rng rng = make_rng(3, {});
  for (int trial = 0; trial < 1000; ++trial) {
    const double mu0 = uniform_real(rng, -10, 10);
    const double span = uniform_real(rng, 0.01, 5) * (trial % 2 ? 1 : -1);
    std::vector<double> mu(500), res(500);
    for (int i = 0; i < 500; ++i) {
      mu[i] = mu0 + span * i / 499.0;
      res[i] = uniform_real(rng, -1, 1);
    }
    const double mu_c = mu0 + span * uniform_real(rng, 1.05, 2.5);
    const TrainingInstance inst = zero_and_normalize(res, mu, mu_c, rng);
    CHECK(std::abs(denormalize_label(inst) - mu_c) <= 1e-12 * std::max(1.0, std::abs(mu_c)));
  }
}

TEST_CASE("instance rows round-trip through CSV") {
  Rng rng = make_rng(4, {});
  std::vector<double> mu(500), res(500);
  for (int i = 0; i < 500; ++i) {
    mu[i] = 0.001 * i;
    res[i] = uniform_real(rng, -1, 1);
  }
  const TrainingInstance a = zero_and_normalize_with_prefix(res, mu, 0.7, 37);
  std::stringstream ss;
  write_instance_row(ss, a);
  write_instance_row(ss, a);
  const auto back = read_instances(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].residual == a.residual);
  CHECK(back[0].mu_norm == a.mu_norm);
  CHECK(back[0].label_norm == a.label_norm);
  CHECK(back[0].prefix == 37);
  CHECK(std::isnan(back[0].mu_first));
  std::stringstream bad("1,2,3\n");
  CHECK_THROWS_AS(read_instances(bad), DataError);
}

TEST_CASE("test series are left-padded to the instance layout") {
  std::vector<double> mu(300), x(300);
  for (int i = 0; i < 300; ++i) {
    mu[i] = 1.0 - 0.002 * i;
    x[i] = std::sin(0.2 * i);
  }
  const TrainingInstance inst = encode_test_instance(mu, x, 0.2);
  CHECK(inst.prefix == 200);
  CHECK(inst.mu_norm[200] == 0.0);
  CHECK(inst.mu_norm[499] == 1.0);
  CHECK(inst.label_norm == doctest::Approx((0.2 - 1.0) / (mu.back() - 1.0)));
  CHECK(std::isnan(encode_test_instance(mu, x, std::nan("")).label_norm));
  CHECK_THROWS_AS(encode_test_instance(std::vector<double>(501, 0.0), std::vector<double>(501, 0.0), 1.0),
                  ArgumentError);
}

TEST_CASE("linear interpolation onto a regular grid") {
  const std::vector<double> mu = {0.0, 0.1, 0.35, 0.4, 1.0};
  std::vector<double> v;
  for (double m : mu) v.push_back(2.0 * m + 1.0);
  const auto r = linear_interpolate_regular(mu, v, 11);
  for (std::size_t i = 0; i < r.mu.size(); ++i) {
    CHECK(r.mu[i] == doctest::Approx(0.1 * i));
    CHECK(r.value[i] == doctest::Approx(2.0 * r.mu[i] + 1.0).epsilon(1e-14));
  }
  CHECK(r.mu.back() == 1.0);
}

TEST_CASE("sidecar JSON round-trip") {
  InstanceSidecar s;
  s.count = 30;
  s.bif_type_counts = {{"fold", 10}, {"hopf", 10}, {"transcritical", 10}};
  s.noise_kind = "red";
  s.seed = 99;
  const auto b = sidecar_from_json(sidecar_to_json(s));
  CHECK(b.count == 30);
  CHECK(b.bif_type_counts == s.bif_type_counts);
  CHECK(b.noise_kind == "red");
  CHECK(b.seed == 99);
}
