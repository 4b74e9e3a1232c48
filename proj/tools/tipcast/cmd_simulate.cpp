#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "cli_common.hpp"
#include "tipcast/io.hpp"
#include "tipcast/models.hpp"

namespace tipcast::cli {

namespace {

struct SimulateArgs {
  std::string model;
  std::string system;
  std::string direction;
  std::optional<double> init;
  std::optional<double> rate;
  std::optional<double> mu_end;
  std::optional<double> dt;
  std::optional<double> sigma;
  double phi = 0.0;
  std::uint64_t seed = 0;
  std::size_t stride = 0;
  std::string out = ".";
};

std::vector<std::string> model_names() {
  std::vector<std::string> v;
  for (ModelId id : all_model_ids()) v.emplace_back(to_string(id));
  return v;
}

}  // namespace

Runner add_simulate(CLI::App& root) {
  auto* app = root.add_subcommand("simulate", "Run a ramped simulation and label its tipping point");
  auto a = std::make_shared<SimulateArgs>();
  auto* model = option(*app, "model", a->model, "Benchmark model id")->check(CLI::IsMember(model_names()));
  auto* system = option(*app, "system", a->system, "Polynomial system JSON file")->check(CLI::ExistingFile);
  model->excludes(system);
  option(*app, "direction", a->direction, "Sweep direction of a hysteresis model")
      ->check(CLI::IsMember({"up", "down"}));
  app->add_option("--init,--init-h,--init-k,--init-a,--init-u,--init-P,--init-D", a->init,
                  "Initial value of the bifurcation parameter")
      ->envname("TIPCAST_INIT");
  option(*app, "rate", a->rate, "Signed sweep rate per unit time");
  option(*app, "mu-end", a->mu_end, "End of the sweep");
  option(*app, "dt", a->dt, "Step size")->check(CLI::PositiveNumber);
  option(*app, "sigma", a->sigma, "Noise amplitude (0 for a noise-free run)")->check(CLI::NonNegativeNumber);
  option(*app, "phi", a->phi, "Lag-1 coefficient of red noise")->check(CLI::Range(-0.999999, 0.999999))->capture_default_str();
  option(*app, "seed", a->seed, "Seed")->capture_default_str();
  option(*app, "stride", a->stride, "Record every n-th step (0: at most 20000 rows)")->capture_default_str();
  option(*app, "out", a->out, "Output directory")->capture_default_str();

  return [app, a]() -> int {
    const std::filesystem::path out(a->out);
    std::optional<DynamicalSystem> sys;
    StateVector x0;
    RampSpec ramp;
    double dt = a->dt.value_or(kDefaultDt);
    NoiseSpec noise = NoiseSpec::none();
    double sigma = a->sigma.value_or(0.01);
    BifurcationType expected = BifurcationType::unclassified;
    double label_end = 0.0;

    if (!a->model.empty()) {
      const ModelId id = model_id_from_string(a->model);
      const ModelProfile p = a->direction.empty()
                                 ? model_profile(id)
                                 : model_profile(id, sweep_direction_from_string(a->direction));
      const NamedModel m(id);
      dt = a->dt.value_or(p.dt);
      sigma = a->sigma.value_or(p.sigma);
      const double init = a->init.value_or(p.initial_values.front());
      ramp = {init, a->rate.value_or(p.rate), a->mu_end.value_or(p.mu_limit)};
      x0 = model_equilibrium(m, p.x_guess, init, dt);
      if (sigma > 0.0) noise = p.noise == NoiseKind::red ? NoiseSpec::red(sigma, a->phi) : NoiseSpec::white(sigma);
      expected = p.expected_type;
      label_end = a->mu_end.value_or(p.mu_limit);
      sys.emplace(m);
    } else if (!a->system.empty()) {
      const PolynomialSystem2D poly = polynomial_system_from_json(read_text_file(a->system));
      if (!a->rate || !a->mu_end) throw UsageError("--system needs --rate and --mu-end");
      const double init = a->init.value_or(poly.mu());
      ramp = {init, *a->rate, *a->mu_end};
      sys.emplace(poly.with_bif_param(poly.bif_param_index));
      ConvergeOptions co;
      co.dt = dt;
      const auto eq = converge_to_equilibrium(*sys, StateVector::Zero(2), init, co);
      if (!eq) throw NotFoundError("system does not settle to an equilibrium at the initial value");
      x0 = *eq;
      if (sigma > 0.0) noise = NoiseSpec::white(sigma);
      label_end = *a->mu_end;
    } else {
      throw UsageError("one of --model or --system is required");
    }
    ramp.validate();
    write_config_echo(*app, out);

    RunOptions ro;
    const std::size_t steps = ramp_steps(ramp, dt);
    ro.record_stride = a->stride > 0 ? a->stride : std::max<std::size_t>(1, steps / 20000);
    Rng rng = make_rng(a->seed, {0});
    Trajectory traj;
    try {
      traj = euler_maruyama_run(*sys, x0, ramp, noise, dt, rng, ro);
    } catch (const DivergenceError& e) {
      if (e.partial()) traj = *e.partial();
      std::cerr << "warning: run diverged after step " << e.last_valid_step() << "\n";
    }
    {
      std::ofstream f(out / "trajectory.csv", std::ios::binary | std::ios::trunc);
      if (!f) throw DataError("cannot write " + (out / "trajectory.csv").string());
      write_trajectory_csv(f, traj);
    }

    LabelOptions lo;
    lo.classify = expected == BifurcationType::unclassified;
    TippingLabel label = label_ramped_run(*sys, x0, RampSpec{ramp.mu0, ramp.rate, label_end}, dt, lo);
    if (!lo.classify) label.bif_type = expected;
    write_text_file_atomic(out / "label.json", to_json(label) + "\n");
    std::cout << "mu_c " << format_double(label.mu_c) << " type " << to_string(label.bif_type);
    if (a->model == to_string(ModelId::sprott_b_hysteresis)) std::cout << " (" << format_double(label.mu_c / M_PI) << " pi)";
    std::cout << "\n";
    return 0;
  };
}

}  // namespace tipcast::cli
