#include "tipcast/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "tipcast/io.hpp"

namespace tipcast {

void RampSpec::validate() const {
  if (!std::isfinite(mu0) || !std::isfinite(rate) || !std::isfinite(mu_end)) {
    throw ArgumentError("ramp values must be finite");
  }
  if (rate != 0.0 && mu_end != mu0 && ((mu_end - mu0) > 0) != (rate > 0)) {
    throw ArgumentError("ramp rate sign must match the direction mu0 -> mu_end");
  }
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::white: return "white";
    case NoiseKind::red: return "red";
  }
  return "none";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  if (name == "none") return NoiseKind::none;
  if (name == "white") return NoiseKind::white;
  if (name == "red") return NoiseKind::red;
  throw ArgumentError("unknown noise kind: " + std::string(name));
}

void NoiseSpec::validate() const {
  if (!std::isfinite(sigma) || sigma < 0.0) throw ArgumentError("noise sigma must be >= 0");
  if (kind == NoiseKind::red && !(std::abs(phi) < 1.0)) {
    throw ArgumentError("red noise requires |phi| < 1");
  }
}

std::vector<double> Trajectory::component(int index) const {
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& s : x) {
    if (index < 0 || index >= s.size()) throw ArgumentError("component index out of range");
    out.push_back(s(index));
  }
  return out;
}

std::size_t ramp_steps(const RampSpec& ramp, double dt) {
  if (ramp.rate == 0.0) throw ArgumentError("a ramp with rate 0 needs an explicit step count");
  const double n = std::abs(ramp.mu_end - ramp.mu0) / (std::abs(ramp.rate) * dt);
  return static_cast<std::size_t>(std::ceil(n - 1e-9));
}

double ramp_mu(const RampSpec& ramp, std::size_t n, double dt) {
  const double mu = ramp.mu0 + static_cast<double>(n) * dt * ramp.rate;
  if (ramp.rate > 0.0) return std::min(mu, ramp.mu_end);
  if (ramp.rate < 0.0) return std::max(mu, ramp.mu_end);
  return mu;
}

NoiseSource::NoiseSource(const NoiseSpec& spec, int dim, double dt, Rng* rng)
    : spec_(spec),
      scale_(spec.sigma * std::sqrt(dt)),
      active_(spec.kind != NoiseKind::none && spec.sigma > 0.0),
      rng_(rng),
      eta_(StateVector::Zero(dim)) {
  spec.validate();
  if (active_ && rng_ == nullptr) throw ArgumentError("noisy run needs an rng");
}

void NoiseSource::apply(StateVector& x) {
  if (!active_) return;
  if (spec_.kind == NoiseKind::white) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += scale_ * normal_(*rng_);
  } else {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      eta_(i) = spec_.phi * eta_(i) + scale_ * normal_(*rng_);
      x(i) += eta_(i);
    }
  }
}

std::size_t run_observed(const DynamicalSystem& system, const StateVector& x0,
                         const RampSpec& ramp, const NoiseSpec& noise, double dt, Rng* rng,
                         const RunOptions& options, const StepObserver& observer) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("dt must be positive");
  ramp.validate();
  if (x0.size() != system.state_dim()) throw ArgumentError("initial state dimension mismatch");
  if (!x0.array().isFinite().all()) throw ArgumentError("initial state must be finite");
  const std::size_t steps = options.steps ? options.steps : ramp_steps(ramp, dt);
  NoiseSource source(noise, system.state_dim(), dt, rng);

  StateVector x = x0;
  if (observer && !observer(StepView{0, options.t0, ramp_mu(ramp, 0, dt), x})) return 0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double mu = ramp_mu(ramp, n, dt);
    x += dt * system.drift(x, mu);
    source.apply(x);
    if (!x.array().isFinite().all() || x.cwiseAbs().maxCoeff() > options.divergence_guard) {
      throw DivergenceError("trajectory diverged at step " + std::to_string(n + 1), n, nullptr);
    }
    const double t = options.t0 + static_cast<double>(n + 1) * dt;
    if (observer && !observer(StepView{n + 1, t, ramp_mu(ramp, n + 1, dt), x})) return n + 1;
  }
  return steps;
}

namespace {

Trajectory recorded_run(const DynamicalSystem& system, const StateVector& x0,
                        const RampSpec& ramp, const NoiseSpec& noise, double dt, Rng* rng,
                        const RunOptions& options) {
  const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
  const std::size_t steps = options.steps ? options.steps : ramp_steps(ramp, dt);
  RunOptions opts = options;
  opts.steps = steps;
  Trajectory traj;
  traj.dt = dt;
  const std::size_t expected = steps / stride + 2;
  traj.t.reserve(expected);
  traj.mu.reserve(expected);
  traj.x.reserve(expected);
  try {
    run_observed(system, x0, ramp, noise, dt, rng, opts, [&](const StepView& v) {
      if (v.step % stride == 0 || v.step == steps) traj.push_back(v.t, v.mu, v.x);
      return true;
    });
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.what(), e.last_valid_step(),
                          std::make_shared<const Trajectory>(std::move(traj)));
  }
  return traj;
}

}  // namespace

Trajectory euler_run(const DynamicalSystem& system, const StateVector& x0, const RampSpec& ramp,
                     double dt, const RunOptions& options) {
  return recorded_run(system, x0, ramp, NoiseSpec::none(), dt, nullptr, options);
}

Trajectory euler_maruyama_run(const DynamicalSystem& system, const StateVector& x0,
                              const RampSpec& ramp, const NoiseSpec& noise, double dt, Rng& rng,
                              const RunOptions& options) {
  return recorded_run(system, x0, ramp, noise, dt, &rng, options);
}

std::optional<StateVector> converge_to_equilibrium(const DynamicalSystem& system,
                                                   const StateVector& x0, double mu,
                                                   const ConvergeOptions& options) {
  if (options.tail < 2 || options.steps < options.tail) {
    throw ArgumentError("converge: need steps >= tail >= 2");
  }
  std::deque<StateVector> tail;
  RunOptions run;
  run.steps = options.steps;
  try {
    run_observed(system, x0, RampSpec::fixed(mu), NoiseSpec::none(), options.dt, nullptr, run,
                 [&](const StepView& v) {
                   if (v.step + options.tail > options.steps) {
                     tail.push_back(v.x);
                   }
                   return true;
                 });
  } catch (const DivergenceError&) {
    return std::nullopt;
  } catch (const NumericError&) {
    return std::nullopt;
  }
  const Eigen::Index n = x0.size();
  for (Eigen::Index c = 0; c < n; ++c) {
    double lo = tail.front()(c);
    double hi = lo;
    for (const auto& s : tail) {
      lo = std::min(lo, s(c));
      hi = std::max(hi, s(c));
    }
    if (!(hi - lo < options.tolerance)) return std::nullopt;
  }
  return tail.back();
}

StateVector burn_in(const DynamicalSystem& system, const StateVector& x0, double mu,
                    const NoiseSpec& noise, double dt, double duration, Rng* rng) {
  RunOptions run;
  run.steps = static_cast<std::size_t>(std::llround(duration / dt));
  StateVector last = x0;
  if (run.steps == 0) return last;
  run_observed(system, x0, RampSpec::fixed(mu), noise, dt, rng, run, [&](const StepView& v) {
    if (v.step == run.steps) last = v.x;
    return true;
  });
  return last;
}

Ar1Process::Ar1Process(double phi, double sigma, double dt)
    : phi_(phi), scale_(sigma * std::sqrt(dt)) {
  if (!(std::abs(phi) < 1.0)) throw ArgumentError("AR(1) requires |phi| < 1");
  if (!(sigma >= 0.0) || !(dt > 0.0)) throw ArgumentError("AR(1) requires sigma >= 0, dt > 0");
}

double Ar1Process::next(Rng& rng) {
  eta_ = phi_ * eta_ + scale_ * normal_(rng);
  return eta_;
}

std::vector<double> Ar1Process::generate(std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (auto& v : out) v = next(rng);
  return out;
}

double sample_training_sigma(Rng& rng) { return sample_triangular(rng, 0.0075, 0.01, 0.0125); }

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const int dim = trajectory.x.empty() ? 1 : static_cast<int>(trajectory.x.front().size());
  out << "t,mu";
  for (int i = 0; i < dim; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t n = 0; n < trajectory.size(); ++n) {
    out << format_double(trajectory.t[n]) << ',' << format_double(trajectory.mu[n]);
    for (int i = 0; i < dim; ++i) out << ',' << format_double(trajectory.x[n](i));
    out << '\n';
  }
}

}  // namespace tipcast
