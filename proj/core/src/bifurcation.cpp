#include "tipcast/bifurcation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include "json.hpp"
#include <ostream>

#include "tipcast/io.hpp"

namespace tipcast {

std::string_view to_string(BifurcationType type) {
  switch (type) {
    case BifurcationType::fold: return "fold";
    case BifurcationType::hopf: return "hopf";
    case BifurcationType::transcritical: return "transcritical";
    case BifurcationType::unclassified: return "unclassified";
  }
  return "unclassified";
}

BifurcationType bifurcation_type_from_string(std::string_view name) {
  if (name == "fold") return BifurcationType::fold;
  if (name == "hopf") return BifurcationType::hopf;
  if (name == "transcritical") return BifurcationType::transcritical;
  if (name == "unclassified") return BifurcationType::unclassified;
  throw ArgumentError("unknown bifurcation type: " + std::string(name));
}

std::string_view to_string(BranchTermination t) {
  switch (t) {
    case BranchTermination::reached_end: return "reached_end";
    case BranchTermination::newton_failure: return "newton_failure";
    case BranchTermination::lambda_stop: return "lambda_stop";
    case BranchTermination::step_limit: return "step_limit";
  }
  return "reached_end";
}

std::vector<std::complex<double>> eigenvalues(const JacobianMatrix& j) {
  const auto n = j.rows();
  if (n != j.cols() || n < 1 || n > kMaxStateDim) {
    throw ArgumentError("eigenvalues: matrix must be square, 1x1 to 3x3");
  }
  if (n == 1) return {std::complex<double>(j(0, 0), 0.0)};
  if (n == 2) {
    const double half_tr = 0.5 * (j(0, 0) + j(1, 1));
    const double det = j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0);
    const double disc = half_tr * half_tr - det;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      // Avoid cancellation in the smaller root.
      const double big = half_tr >= 0 ? half_tr + r : half_tr - r;
      const double small = big != 0.0 ? det / big : 0.0;
      return {std::complex<double>(std::max(big, small), 0.0),
              std::complex<double>(std::min(big, small), 0.0)};
    }
    const double im = std::sqrt(-disc);
    return {std::complex<double>(half_tr, im), std::complex<double>(half_tr, -im)};
  }
  Eigen::Matrix3d m = j;
  Eigen::EigenSolver<Eigen::Matrix3d> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalue iteration did not converge");
  std::vector<std::complex<double>> out;
  for (int i = 0; i < 3; ++i) out.push_back(solver.eigenvalues()(i));
  return out;
}

LeadingEigen leading_eigen(const JacobianMatrix& j, double complex_band) {
  const auto eig = eigenvalues(j);
  LeadingEigen out;
  out.max_real = -std::numeric_limits<double>::infinity();
  for (const auto& e : eig) {
    out.max_real = std::max(out.max_real, e.real());
    out.spectral_radius = std::max(out.spectral_radius, std::abs(e));
  }
  const double im_floor = 1e-12 * std::max(1.0, out.spectral_radius);
  for (const auto& e : eig) {
    if (std::abs(e.imag()) > im_floor &&
        e.real() >= out.max_real - complex_band * out.spectral_radius) {
      out.complex_near_critical = true;
    }
  }
  return out;
}

double max_real_eigenvalue(const JacobianMatrix& j) { return leading_eigen(j).max_real; }

double instantaneous_recovery_rate(const DynamicalSystem& system, const StateVector& x,
                                   double mu) {
  return max_real_eigenvalue(jacobian(system, x, mu));
}

double recovery_rate(const DynamicalSystem& system, const StateVector& x_star, double mu,
                     double tol) {
  const StateVector f = eval_rhs(system, x_star, mu);
  if (!(f.cwiseAbs().maxCoeff() < tol)) {
    throw PreconditionError("recovery_rate: state is not an equilibrium (|f| = " +
                            format_double(f.cwiseAbs().maxCoeff()) + ")");
  }
  return instantaneous_recovery_rate(system, x_star, mu);
}

std::optional<StateVector> newton_correct(const DynamicalSystem& system, const StateVector& guess,
                                          double mu, const NewtonOptions& options) {
  StateVector x = guess;
  for (int it = 0; it <= options.max_iterations; ++it) {
    StateVector f;
    try {
      f = system.drift(x, mu);
    } catch (const NumericError&) {
      return std::nullopt;
    }
    if (!f.array().isFinite().all()) return std::nullopt;
    if (f.cwiseAbs().maxCoeff() < options.tolerance) return x;
    if (it == options.max_iterations) break;
    JacobianMatrix j;
    try {
      j = system.drift_jacobian(x, mu);
    } catch (const NumericError&) {
      return std::nullopt;
    }
    if (!j.array().isFinite().all()) return std::nullopt;
    StateVector dx;
    if (j.rows() == 1) {
      if (j(0, 0) == 0.0) return std::nullopt;
      dx = StateVector::Constant(1, -f(0) / j(0, 0));
    } else {
      Eigen::FullPivLU<JacobianMatrix> lu(j);
      if (!lu.isInvertible()) return std::nullopt;
      dx = lu.solve(-f);
    }
    if (!dx.array().isFinite().all()) return std::nullopt;
    x += dx;
    if (x.cwiseAbs().maxCoeff() > kDivergenceGuard) return std::nullopt;
  }
  return std::nullopt;
}

namespace {

std::optional<LeadingEigen> safe_leading(const DynamicalSystem& system, const StateVector& x,
                                         double mu, double band) {
  try {
    JacobianMatrix j = system.drift_jacobian(x, mu);
    if (!j.array().isFinite().all()) return std::nullopt;
    return leading_eigen(j, band);
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

}  // namespace

EquilibriumBranch continue_branch(const DynamicalSystem& system, const StateVector& seed,
                                  double mu0, double mu_end, double d_mu,
                                  const ContinuationOptions& options) {
  if (seed.size() != system.state_dim()) throw ArgumentError("seed dimension mismatch");
  if (!seed.array().isFinite().all() || !std::isfinite(mu0) || !std::isfinite(mu_end) ||
      !std::isfinite(d_mu)) {
    throw ArgumentError("continuation inputs must be finite");
  }
  if (mu_end == mu0) throw ArgumentError("continuation needs mu_end != mu0");
  const double dir = mu_end > mu0 ? 1.0 : -1.0;
  const double span = std::abs(mu_end - mu0);
  if (d_mu != 0.0 && (d_mu > 0) != (dir > 0)) {
    throw ArgumentError("d_mu sign must match the continuation direction");
  }
  const double h_nom = d_mu == 0.0 ? span / 2000.0 : std::abs(d_mu);
  const double h_min = std::min(h_nom, options.refine_fraction * span);
  const double eps = 1e-12 * span;

  EquilibriumBranch branch;
  branch.d_mu = dir * h_nom;
  auto x0 = newton_correct(system, seed, mu0, options.newton);
  if (!x0) throw SeedError("Newton correction of the seed failed at mu0");
  auto l0 = safe_leading(system, *x0, mu0, options.complex_band);
  if (!l0) throw SeedError("Jacobian at the seed is not finite");
  branch.push_back(mu0, *x0, l0->max_real, l0->complex_near_critical);

  double h = h_nom;
  bool crossed = false;
  std::size_t crossing_index = 0;
  bool refine_active = false;
  double refine_until = mu0;

  while (true) {
    const double mu = branch.mu.back();
    const double remaining = dir * (mu_end - mu);
    if (remaining <= eps) {
      branch.termination = BranchTermination::reached_end;
      break;
    }
    const bool refining = refine_active && dir * (refine_until - mu) > eps;
    const double step = std::min(refining ? h_min : h, remaining);
    const double mu_try = step == remaining ? mu_end : mu + dir * step;
    const StateVector& x = branch.x_star.back();

    std::optional<StateVector> xn;
    if (branch.size() >= 2) {
      const double mu_prev = branch.mu[branch.size() - 2];
      const StateVector& x_prev = branch.x_star[branch.size() - 2];
      const StateVector guess = x + (x - x_prev) * ((mu_try - mu) / (mu - mu_prev));
      xn = newton_correct(system, guess, mu_try, options.newton);
    }
    if (!xn) xn = newton_correct(system, x, mu_try, options.newton);
    // A large jump means Newton landed on a different branch.
    if (xn && (*xn - x).cwiseAbs().maxCoeff() > 0.25 * (1.0 + x.cwiseAbs().maxCoeff())) {
      xn.reset();
    }
    std::optional<LeadingEigen> ln;
    if (xn) ln = safe_leading(system, *xn, mu_try, options.complex_band);
    if (!xn || !ln) {
      if (step > h_min * (1.0 + 1e-9)) {
        h = std::max(step / 2.0, h_min);
        continue;
      }
      branch.termination = BranchTermination::newton_failure;
      break;
    }
    const double lam_prev = branch.lambda.back();
    if (!crossed && !refining && lam_prev <= 0.0 && ln->max_real > 0.0 &&
        step > h_min * (1.0 + 1e-9)) {
      // Redo this interval on the fine grid so the first crossing is resolved.
      refine_active = true;
      refine_until = mu_try;
      continue;
    }
    branch.push_back(mu_try, *xn, ln->max_real, ln->complex_near_critical);
    if (!crossed && lam_prev <= 0.0 && ln->max_real > 0.0) {
      crossed = true;
      crossing_index = branch.size() - 1;
    }
    if (crossed) {
      if (ln->max_real > options.lambda_stop) {
        branch.termination = BranchTermination::lambda_stop;
        break;
      }
      if (branch.size() - 1 - crossing_index >= options.max_steps_past_crossing) {
        branch.termination = BranchTermination::step_limit;
        break;
      }
    }
    if (!refining) h = std::min(h_nom, 2.0 * h);
  }
  return branch;
}

TippingLabel locate_crossing(const EquilibriumBranch& branch) {
  const std::size_t n = branch.size();
  if (n < 2 || branch.lambda.size() != n || branch.x_star.size() != n) {
    throw ArgumentError("locate_crossing: branch needs at least 2 aligned points");
  }
  const auto near_complex = [&](std::size_t i) {
    return i < branch.complex_near_critical.size() && branch.complex_near_critical[i] != 0;
  };
  for (std::size_t i = 1; i < n; ++i) {
    const double l0 = branch.lambda[i - 1];
    const double l1 = branch.lambda[i];
    if (l0 <= 0.0 && l1 > 0.0) {
      TippingLabel label;
      label.mu_c = branch.mu[i - 1] + (0.0 - l0) * (branch.mu[i] - branch.mu[i - 1]) / (l1 - l0);
      const std::size_t after = n - 1 - i;
      if (near_complex(i - 1) || near_complex(i)) {
        label.bif_type = BifurcationType::hopf;
      } else if (branch.termination == BranchTermination::newton_failure && after < 5) {
        label.bif_type = BifurcationType::fold;
      } else if (after >= 5 || branch.termination == BranchTermination::lambda_stop) {
        label.bif_type = BifurcationType::transcritical;
      } else {
        label.bif_type = BifurcationType::unclassified;
      }
      return label;
    }
  }
  if (branch.termination == BranchTermination::newton_failure && !near_complex(n - 1)) {
    const double la = branch.lambda[n - 2];
    const double lb = branch.lambda[n - 1];
    const double qa = la * la;
    const double qb = lb * lb;
    const double dmu = branch.mu[n - 1] - branch.mu[n - 2];
    if (la < 0.0 && lb < 0.0 && qa > qb && dmu != 0.0) {
      const double mu_f = branch.mu[n - 1] + qb * dmu / (qa - qb);
      const double reach = 4.0 * std::max(std::abs(branch.d_mu), std::abs(dmu));
      if (std::abs(mu_f - branch.mu[n - 1]) <= reach) return {mu_f, BifurcationType::fold};
    }
  }
  throw NotFoundError("no recovery-rate sign change on the branch");
}

RecoveryRateMonitor::RecoveryRateMonitor(const DynamicalSystem& system, double complex_band)
    : system_(&system), band_(complex_band) {}

bool RecoveryRateMonitor::observe(double mu, const StateVector& x) {
  ++count_;
  if (crossed_) return true;
  JacobianMatrix j = system_->drift_jacobian(x, mu);
  if (!j.array().isFinite().all()) throw NumericError("non-finite Jacobian along run");
  const LeadingEigen l = leading_eigen(j, band_);
  if (!seen_stable_) {
    if (l.max_real <= 0.0) {
      seen_stable_ = true;
      prev_mu_ = mu;
      prev_lambda_ = l.max_real;
      prev_complex_ = l.complex_near_critical;
    }
    return false;
  }
  if (prev_lambda_ <= 0.0 && l.max_real > 0.0) {
    crossed_ = true;
    mu_c_ = prev_mu_ + (0.0 - prev_lambda_) * (mu - prev_mu_) / (l.max_real - prev_lambda_);
    complex_at_crossing_ = prev_complex_ || l.complex_near_critical;
    return true;
  }
  prev_mu_ = mu;
  prev_lambda_ = l.max_real;
  prev_complex_ = l.complex_near_critical;
  return false;
}

BifurcationType classify_static(const DynamicalSystem& system, const StateVector& x0, double mu0,
                                double mu_target, double complex_band) {
  if (mu_target == mu0) return BifurcationType::unclassified;
  ContinuationOptions opts;
  opts.max_steps_past_crossing = 10;
  opts.complex_band = complex_band;
  try {
    const auto branch = continue_branch(system, x0, mu0, mu_target, 0.0, opts);
    return locate_crossing(branch).bif_type;
  } catch (const NotFoundError&) {
    return BifurcationType::unclassified;
  }
}

namespace {
TippingLabel finish_label(const DynamicalSystem& system, const RecoveryRateMonitor& monitor,
                          const StateVector& x0, double mu0, const LabelOptions& options) {
  TippingLabel label;
  label.mu_c = monitor.mu_c();
  if (monitor.complex_at_crossing()) {
    label.bif_type = BifurcationType::hopf;
  } else if (options.classify) {
    label.bif_type = classify_static(system, x0, mu0, mu0 + 1.2 * (label.mu_c - mu0),
                                     options.complex_band);
  }
  return label;
}
}  // namespace

TippingLabel label_tipping_from_run(const DynamicalSystem& system, const Trajectory& trajectory,
                                    const LabelOptions& options) {
  if (trajectory.empty()) throw ArgumentError("empty trajectory");
  RecoveryRateMonitor monitor(system, options.complex_band);
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (monitor.observe(trajectory.mu[i], trajectory.x[i])) break;
  }
  if (!monitor.crossed()) throw NotFoundError("recovery rate never changes sign along the run");
  return finish_label(system, monitor, trajectory.x.front(), trajectory.mu.front(), options);
}

TippingLabel label_ramped_run(const DynamicalSystem& system, const StateVector& x0,
                              const RampSpec& ramp, double dt, const LabelOptions& options) {
  RecoveryRateMonitor monitor(system, options.complex_band);
  try {
    run_observed(system, x0, ramp, NoiseSpec::none(), dt, nullptr, RunOptions{},
                 [&](const StepView& v) { return !monitor.observe(v.mu, v.x); });
  } catch (const DivergenceError&) {
    throw NotFoundError("run diverged before the recovery rate changed sign");
  }
  if (!monitor.crossed()) throw NotFoundError("recovery rate never changes sign along the run");
  return finish_label(system, monitor, x0, ramp.mu0, options);
}

std::string to_json(const TippingLabel& label) {
  nlohmann::json j;
  j["mu_c"] = label.mu_c;
  j["bif_type"] = std::string(to_string(label.bif_type));
  return j.dump();
}

TippingLabel tipping_label_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return {j.at("mu_c").get<double>(),
            bifurcation_type_from_string(j.at("bif_type").get<std::string>())};
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("invalid tipping label JSON: ") + e.what());
  }
}

void write_branch_csv(std::ostream& out, const EquilibriumBranch& branch) {
  const int dim = branch.x_star.empty() ? 1 : static_cast<int>(branch.x_star.front().size());
  out << "mu";
  for (int i = 0; i < dim; ++i) out << ",x" << i;
  out << ",lambda\n";
  for (std::size_t n = 0; n < branch.size(); ++n) {
    out << format_double(branch.mu[n]);
    for (int i = 0; i < dim; ++i) out << ',' << format_double(branch.x_star[n](i));
    out << ',' << format_double(branch.lambda[n]) << '\n';
  }
}

}  // namespace tipcast
