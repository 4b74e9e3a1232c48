#include "tipcast/ews.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "tipcast/io.hpp"

namespace tipcast {

namespace {

void require_samples(std::size_t n) {
  if (n < kMinWindowSamples) {
    throw DataError("window has " + std::to_string(n) + " samples, fewer than " +
                    std::to_string(kMinWindowSamples));
  }
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

double lag1_coefficient(std::span<const double> series) {
  if (series.size() < 3) throw DataError("lag-1 coefficient needs at least 3 samples");
  const double m = mean_of(series);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    num += (series[i] - m) * (series[i - 1] - m);
    den += (series[i - 1] - m) * (series[i - 1] - m);
  }
  if (!(den > 0.0)) throw DataError("lag-1 coefficient of a constant series is undefined");
  return num / den;
}

double degenerate_fingerprinting(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) throw ArgumentError("degenerate fingerprinting needs at least one variable");
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw ArgumentError("degenerate fingerprinting: unequal column lengths");
  }
  require_samples(n);
  std::vector<const std::vector<double>*> live;
  for (const auto& c : columns) {
    const double m = mean_of(c);
    double var = 0.0;
    for (double v : c) var += (v - m) * (v - m);
    if (var > 0.0) live.push_back(&c);
  }
  if (live.empty()) throw DataError("all variables are constant");
  if (live.size() == 1) return lag1_coefficient(*live.front());

  const auto m = static_cast<Eigen::Index>(live.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& c = *live[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), j) = c[i];
  }
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("covariance eigensolver failed");
  const Eigen::VectorXd pc = solver.eigenvectors().col(m - 1);
  const Eigen::VectorXd proj = x * pc;
  return lag1_coefficient(std::span<const double>(proj.data(), static_cast<std::size_t>(proj.size())));
}

std::string_view to_string(BbBranch b) {
  switch (b) {
    case BbBranch::automatic: return "automatic";
    case BbBranch::phi_dominant: return "phi_dominant";
    case BbBranch::rho_dominant: return "rho_dominant";
  }
  return "automatic";
}

BbBranch bb_branch_from_string(std::string_view name) {
  if (name == "automatic") return BbBranch::automatic;
  if (name == "phi_dominant" || name == "plus") return BbBranch::phi_dominant;
  if (name == "rho_dominant" || name == "minus") return BbBranch::rho_dominant;
  throw ArgumentError("unknown BB branch: " + std::string(name));
}

double bb_naive_phi_b(double phi, double rho) { return (phi + rho) / (1.0 + phi * rho); }

BbEstimate bb_estimate(std::span<const double> window, BbBranch branch) {
  require_samples(window.size());
  BbEstimate out;
  out.phi_b = lag1_coefficient(window);
  const double m = mean_of(window);
  std::vector<double> v(window.size() - 1);
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    v[i] = (window[i + 1] - m) - out.phi_b * (window[i] - m);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    num += v[i] * v[i - 1];
    den += v[i - 1] * v[i - 1];
  }
  out.rho_b = den > 0.0 ? num / den : 0.0;
  if (out.phi_b == 0.0) {
    out.phi = out.phi_b;
    out.degraded = true;
    return out;
  }
  const double s = out.phi_b + out.rho_b;
  const double disc = s * s - 4.0 * out.rho_b / out.phi_b;
  if (disc < 0.0) {
    out.phi = out.phi_b;
    out.degraded = true;
    return out;
  }
  const double r = std::sqrt(disc);
  const double plus = 0.5 * (s + r);
  const double minus = 0.5 * (s - r);
  switch (branch) {
    case BbBranch::phi_dominant:
      out.phi = plus;
      break;
    case BbBranch::rho_dominant:
      out.phi = minus;
      break;
    case BbBranch::automatic: {
      const bool plus_ok = std::abs(plus) < 1.0;
      const bool minus_ok = std::abs(minus) < 1.0;
      if (plus_ok && minus_ok) {
        out.phi = std::abs(minus - out.phi_b) < std::abs(plus - out.phi_b) ? minus : plus;
      } else if (minus_ok && !plus_ok) {
        out.phi = minus;
      } else {
        out.phi = plus;
      }
      break;
    }
  }
  return out;
}

DevResult dev(std::span<const double> window, const SmapConfig& cfg) {
  if (cfg.E < 1 || cfg.tau < 1 || !(cfg.theta >= 0.0)) {
    throw ArgumentError("S-map needs E >= 1, tau >= 1, theta >= 0");
  }
  const std::size_t lag = static_cast<std::size_t>(cfg.E - 1) * static_cast<std::size_t>(cfg.tau);
  const std::size_t need = static_cast<std::size_t>(cfg.E) * static_cast<std::size_t>(cfg.tau) + 10;
  if (window.size() < need) {
    throw DataError("DEV window needs at least E*tau + 10 = " + std::to_string(need) + " samples");
  }
  const std::size_t n = window.size();
  const auto tau = static_cast<std::size_t>(cfg.tau);
  const Eigen::Index e = cfg.E;
  const auto delay = [&](std::size_t t) {
    Eigen::VectorXd x(e);
    for (Eigen::Index j = 0; j < e; ++j) x(j) = window[t - static_cast<std::size_t>(j) * tau];
    return x;
  };
  // Library rows: t with a full delay vector and a successor t + tau.
  std::vector<std::size_t> rows;
  for (std::size_t t = lag; t + tau < n; ++t) rows.push_back(t);
  const Eigen::VectorXd target = delay(n - 1);

  std::vector<double> u(rows.size());
  double ubar = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    u[i] = (delay(rows[i]) - target).squaredNorm();
    ubar += u[i];
  }
  ubar /= static_cast<double>(rows.size());

  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), e);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double w = (cfg.theta == 0.0 || ubar == 0.0) ? 1.0 : std::exp(-cfg.theta * u[i] / ubar);
    const auto ii = static_cast<Eigen::Index>(i);
    a.row(ii) = w * delay(rows[i]).transpose();
    b(ii) = w * window[rows[i] + tau];
  }

  DevResult out;
  Eigen::VectorXd coef;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  if (cod.rank() == e) {
    coef = cod.solve(b);
  } else {
    const Eigen::MatrixXd ata = a.transpose() * a;
    const double ridge = 1e-8 * std::max(ata.trace() / static_cast<double>(e), 1e-300);
    coef = (ata + ridge * Eigen::MatrixXd::Identity(e, e)).ldlt().solve(a.transpose() * b);
    out.ridge = true;
  }
  if (!coef.allFinite()) throw NumericError("S-map coefficients are not finite");
  out.coefficients.assign(coef.data(), coef.data() + coef.size());

  if (e == 1) {
    out.eigenvalue = coef(0);
  } else {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(e, e);
    j.row(0) = coef.transpose();
    for (Eigen::Index i = 1; i < e; ++i) j(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(j, false);
    if (solver.info() != Eigen::Success) throw NumericError("companion eigensolver failed");
    const auto ev = solver.eigenvalues();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i) {
      if (std::abs(ev(i)) > std::abs(ev(best))) best = i;
    }
    out.eigenvalue = ev(best);
  }
  out.modulus = std::abs(out.eigenvalue);
  return out;
}

std::string_view to_string(EwsMethod m) {
  switch (m) {
    case EwsMethod::df: return "df";
    case EwsMethod::bb: return "bb";
    case EwsMethod::dev: return "dev";
  }
  return "df";
}

EwsMethod ews_method_from_string(std::string_view name) {
  if (name == "df") return EwsMethod::df;
  if (name == "bb") return EwsMethod::bb;
  if (name == "dev") return EwsMethod::dev;
  throw ArgumentError("unknown indicator method: " + std::string(name));
}

IndicatorSeries indicator_series(const std::vector<std::vector<double>>& columns,
                                 std::span<const double> mu_seq, EwsMethod method,
                                 const IndicatorOptions& options) {
  if (columns.empty()) throw ArgumentError("indicator needs at least one series");
  const std::size_t n = mu_seq.size();
  for (const auto& c : columns) {
    if (c.size() != n) throw ArgumentError("indicator: series and mu lengths differ");
  }
  if (!(options.window_frac > 0.0 && options.window_frac <= 1.0)) {
    throw ArgumentError("window_frac must be in (0, 1]");
  }
  if (options.step == 0) throw ArgumentError("window step must be >= 1");
  const auto w = static_cast<std::size_t>(std::floor(options.window_frac * static_cast<double>(n) + 1e-9));
  if (w < 2) throw DataError("window too short");

  IndicatorSeries out;
  out.method = method;
  out.window_frac = options.window_frac;
  for (std::size_t s = 0; s + w <= n; s += options.step) {
    try {
      double value = 0.0;
      if (method == EwsMethod::df) {
        std::vector<std::vector<double>> win;
        win.reserve(columns.size());
        for (const auto& c : columns) win.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(s),
                                                       c.begin() + static_cast<std::ptrdiff_t>(s + w));
        value = degenerate_fingerprinting(win);
      } else {
        const std::span<const double> win(columns.front().data() + s, w);
        value = method == EwsMethod::bb ? bb_estimate(win, options.bb_branch).phi
                                        : dev(win, options.smap).modulus;
      }
      if (!std::isfinite(value)) throw NumericError("non-finite indicator");
      out.mu.push_back(mu_seq[s + w - 1]);
      out.value.push_back(value);
    } catch (const std::runtime_error&) {
      ++out.gaps;
    }
  }
  return out;
}

std::optional<double> extrapolate_tipping(const IndicatorSeries& indicator) {
  const std::size_t n = indicator.mu.size();
  if (n < 3 || indicator.value.size() != n) return std::nullopt;
  double center = 0.0;
  for (double m : indicator.mu) center += m;
  center /= static_cast<double>(n);
  double scale = 0.0;
  for (double m : indicator.mu) scale = std::max(scale, std::abs(m - center));
  if (!(scale > 0.0)) return std::nullopt;

  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (indicator.mu[i] - center) / scale;
    const auto ii = static_cast<Eigen::Index>(i);
    a(ii, 0) = 1.0;
    a(ii, 1) = t;
    a(ii, 2) = t * t;
    y(ii) = indicator.value[i];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
  if (!c.allFinite()) return std::nullopt;

  const double t_last = (indicator.mu.back() - center) / scale;
  const double dir = indicator.mu.back() >= indicator.mu.front() ? 1.0 : -1.0;
  const double c0 = c(0) - indicator.threshold;
  const double tiny = 1e-10 * std::max(1.0, std::abs(c(0)));
  const double c1 = std::abs(c(1)) <= tiny ? 0.0 : c(1);
  const double c2 = std::abs(c(2)) <= tiny ? 0.0 : c(2);
  const auto q = [&](double t) { return (c2 * t + c1) * t + c0; };
  if (q(t_last) >= 0.0) return indicator.mu.back();

  std::vector<double> roots;
  if (c2 == 0.0) {
    if (c1 == 0.0) return std::nullopt;
    roots.push_back(-c0 / c1);
  } else {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return std::nullopt;
    const double r = std::sqrt(disc);
    const double qq = -0.5 * (c1 + (c1 >= 0 ? r : -r));
    roots.push_back(qq / c2);
    if (qq != 0.0) roots.push_back(c0 / qq);
  }
  std::optional<double> best;
  for (double r : roots) {
    if (dir * (r - t_last) >= 0.0 && (!best || dir * (r - *best) < 0.0)) best = r;
  }
  if (!best) return std::nullopt;
  return center + *best * scale;
}

void write_indicator_csv(std::ostream& out, const IndicatorSeries& indicator) {
  out << "mu,value,method,window_frac\n";
  for (std::size_t i = 0; i < indicator.mu.size(); ++i) {
    out << format_double(indicator.mu[i]) << ',' << format_double(indicator.value[i]) << ','
        << to_string(indicator.method) << ',' << format_double(indicator.window_frac) << '\n';
  }
}

}  // namespace tipcast
