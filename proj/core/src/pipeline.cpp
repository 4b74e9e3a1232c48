#include "tipcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "parallel.hpp"
#include "tipcast/io.hpp"

namespace tipcast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::size_t type_slot(BifurcationType t) {
  for (std::size_t i = 0; i < kCorpusTypes.size(); ++i) {
    if (kCorpusTypes[i] == t) return i;
  }
  throw ArgumentError("type is not counted in the corpus");
}

json config_to_json(const CorpusConfig& c) {
  json j;
  j["target_count_per_type"] = c.target_count_per_type;
  j["noise_kind"] = std::string(to_string(c.noise_kind));
  j["seed"] = c.seed;
  j["dt"] = c.dt;
  j["rate_ratios"] = c.rate_ratios;
  j["runs_per_bifurcation"] = c.runs_per_bifurcation;
  j["max_attempts"] = c.max_attempts;
  j["continuation_span"] = c.continuation_span;
  j["base_sweep_steps"] = c.base_sweep_steps;
  j["burn_in_time"] = c.burn_in_time;
  return j;
}

CorpusConfig config_from_json(const json& j) {
  CorpusConfig c;
  c.target_count_per_type = j.at("target_count_per_type").get<std::size_t>();
  c.noise_kind = noise_kind_from_string(j.at("noise_kind").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.dt = j.at("dt").get<double>();
  c.rate_ratios = j.at("rate_ratios").get<std::vector<int>>();
  c.runs_per_bifurcation = j.at("runs_per_bifurcation").get<std::size_t>();
  c.max_attempts = j.at("max_attempts").get<std::size_t>();
  c.continuation_span = j.at("continuation_span").get<double>();
  c.base_sweep_steps = j.at("base_sweep_steps").get<std::size_t>();
  c.burn_in_time = j.at("burn_in_time").get<double>();
  return c;
}

std::map<std::string, std::size_t> zero_counts() {
  std::map<std::string, std::size_t> m;
  for (auto t : kCorpusTypes) m[std::string(to_string(t))] = 0;
  return m;
}

const char* kMetaHeader =
    "index,system_index,bif_param_index,direction,bif_type,rate_ratio,mu0,mu_static,mu_c,sigma,"
    "phi,prefix,draw_count,label_norm,mu_first,mu_last\n";

std::string meta_row(std::size_t index, const GeneratedInstance& g) {
  const auto& m = g.meta;
  const auto& in = g.instance;
  std::ostringstream ss;
  ss << index << ',' << m.system_index << ',' << m.bif_param_index << ',' << m.direction << ','
     << to_string(m.bif_type) << ',' << m.rate_ratio << ',' << format_double(m.mu0) << ','
     << format_double(m.mu_static) << ',' << format_double(m.mu_c) << ','
     << format_double(m.sigma) << ',' << format_double(m.phi) << ',' << in.prefix << ','
     << m.draw_count << ',' << format_double(in.label_norm) << ',' << format_double(in.mu_first)
     << ',' << format_double(in.mu_last) << '\n';
  return ss.str();
}

void simulate_bifurcation(const CorpusConfig& cfg, const DynamicalSystem& sys,
                          const StateVector& x_eq, double mu0, const TippingLabel& statics,
                          InstanceMeta meta, Rng& rng, std::vector<GeneratedInstance>& out) {
  const double mu_end = mu0 + 1.2 * (statics.mu_c - mu0);
  const double base_rate =
      (mu_end - mu0) / (static_cast<double>(cfg.base_sweep_steps) * cfg.dt);
  std::vector<int> ratios = cfg.rate_ratios;
  std::shuffle(ratios.begin(), ratios.end(), rng);
  ratios.resize(std::min(ratios.size(), cfg.runs_per_bifurcation));

  for (int ratio : ratios) {
    // Draw every random quantity of the run up front so that discarding a run
    // never shifts the stream of the next one.
    const double sigma = sample_training_sigma(rng);
    double phi = 0.0;
    if (cfg.noise_kind == NoiseKind::red) {
      do {
        phi = uniform_real(rng, -1.0, 1.0);
      } while (!(std::abs(phi) < 1.0));
    }
    Rng run_rng(rng());
    const RampSpec ramp{mu0, base_rate * ratio, mu_end};

    LabelOptions lo;
    lo.classify = false;
    TippingLabel delayed;
    try {
      delayed = label_ramped_run(sys, x_eq, ramp, cfg.dt, lo);
    } catch (const NotFoundError&) {
      continue;
    } catch (const NumericError&) {
      continue;
    }
    if (!((delayed.mu_c - mu0) * (mu_end - mu0) > 0.0)) continue;

    const NoiseSpec noise = cfg.noise_kind == NoiseKind::red ? NoiseSpec::red(sigma, phi)
                                                            : NoiseSpec::white(sigma);
    Trajectory traj;
    try {
      const StateVector start = burn_in(sys, x_eq, mu0, noise, cfg.dt, cfg.burn_in_time, &run_rng);
      traj = euler_maruyama_run(sys, start, RampSpec{mu0, ramp.rate, delayed.mu_c}, noise, cfg.dt,
                                run_rng);
    } catch (const NumericError&) {
      continue;
    }

    for (int attempt = 0; attempt < 20; ++attempt) {
      try {
        const RawSample raw = irregular_sample(traj, mu0, delayed.mu_c, run_rng);
        const auto residual = lowess_detrend(raw.state_seq, raw.mu_seq);
        TrainingInstance inst = zero_and_normalize(residual, raw.mu_seq, delayed.mu_c, run_rng);
        if (!(inst.label_norm >= kLabelMin && inst.label_norm <= kLabelMax)) continue;
        GeneratedInstance g;
        g.instance = std::move(inst);
        g.meta = meta;
        g.meta.rate_ratio = ratio;
        g.meta.mu_c = delayed.mu_c;
        g.meta.sigma = sigma;
        g.meta.phi = phi;
        g.meta.draw_count = raw.draw_count;
        out.push_back(std::move(g));
        break;
      } catch (const DataError&) {
        break;
      } catch (const ArgumentError&) {
        break;
      }
    }
  }
}

}  // namespace

void CorpusConfig::validate() const {
  if (target_count_per_type == 0) throw ArgumentError("target_count_per_type must be > 0");
  if (noise_kind == NoiseKind::none) throw ArgumentError("corpus noise must be white or red");
  if (!(dt > 0.0)) throw ArgumentError("dt must be positive");
  if (rate_ratios.empty()) throw ArgumentError("rate_ratios must not be empty");
  for (int r : rate_ratios) {
    if (r < 1 || r > 10) throw ArgumentError("rate ratios must be drawn from 1..10");
  }
  if (runs_per_bifurcation == 0) throw ArgumentError("runs_per_bifurcation must be > 0");
  if (!(continuation_span > 0.0)) throw ArgumentError("continuation_span must be positive");
  if (base_sweep_steps < 2 * kInstanceLength) {
    throw ArgumentError("base_sweep_steps must leave room for 1000 samples");
  }
  if (!(burn_in_time >= 0.0)) throw ArgumentError("burn_in_time must be >= 0");
}

SystemOutcome process_system(const CorpusConfig& cfg, std::uint64_t system_index,
                             const std::array<bool, 3>& skip) {
  SystemOutcome out;
  Rng rng = make_rng(cfg.seed, {system_index});
  const PolynomialSystem2D base = sample_random_system(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  StateVector x0(2);
  x0(0) = normal(rng);
  x0(1) = normal(rng);

  const DynamicalSystem sys0(base);
  ConvergeOptions conv_opts;
  conv_opts.dt = cfg.dt;
  const auto conv = converge_to_equilibrium(sys0, x0, base.mu(), conv_opts);
  if (!conv) return out;
  const auto eq = newton_correct(sys0, *conv, base.mu());
  if (!eq) return out;
  try {
    if (!(instantaneous_recovery_rate(sys0, *eq, base.mu()) < 0.0)) return out;
  } catch (const std::runtime_error&) {
    return out;
  }
  out.converged = true;

  ContinuationOptions co;
  co.max_steps_past_crossing = 10;
  for (int p : base.nonzero_indices()) {
    const PolynomialSystem2D s = base.with_bif_param(p);
    const DynamicalSystem sys(s);
    const double mu0 = s.mu();
    for (int dir : {1, -1}) {
      TippingLabel statics;
      try {
        const auto branch =
            continue_branch(sys, *eq, mu0, mu0 + dir * cfg.continuation_span, 0.0, co);
        statics = locate_crossing(branch);
      } catch (const NotFoundError&) {
        continue;
      }
      if (statics.bif_type == BifurcationType::unclassified) continue;
      ++out.bifurcations_found;
      if (skip[type_slot(statics.bif_type)]) continue;
      const std::uint64_t bif_id = 2 * static_cast<std::uint64_t>(p) + (dir < 0 ? 1 : 0);
      Rng brng = make_rng(cfg.seed, {system_index, bif_id});
      InstanceMeta meta;
      meta.system_index = system_index;
      meta.bif_param_index = p;
      meta.direction = dir;
      meta.bif_type = statics.bif_type;
      meta.mu0 = mu0;
      meta.mu_static = statics.mu_c;
      simulate_bifurcation(cfg, sys, *eq, mu0, statics, meta, brng, out.instances);
    }
  }
  return out;
}

std::string manifest_to_json(const CorpusManifest& m) {
  json j;
  j["config"] = config_to_json(m.config);
  j["counts"] = m.counts;
  j["next_system_index"] = m.next_system_index;
  j["systems_converged"] = m.systems_converged;
  j["instances_bytes"] = m.instances_bytes;
  j["meta_bytes"] = m.meta_bytes;
  j["content_hash"] = m.content_hash;
  j["complete"] = m.complete;
  j["null_model"] = m.null_model;
  return j.dump(2) + "\n";
}

CorpusManifest manifest_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    CorpusManifest m;
    m.config = config_from_json(j.at("config"));
    m.counts = j.at("counts").get<std::map<std::string, std::size_t>>();
    m.next_system_index = j.at("next_system_index").get<std::uint64_t>();
    m.systems_converged = j.at("systems_converged").get<std::uint64_t>();
    m.instances_bytes = j.at("instances_bytes").get<std::uint64_t>();
    m.meta_bytes = j.at("meta_bytes").get<std::uint64_t>();
    m.content_hash = j.at("content_hash").get<std::string>();
    m.complete = j.at("complete").get<bool>();
    m.null_model = j.value("null_model", false);
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid corpus manifest: ") + e.what());
  }
}

CorpusManifest read_manifest(const fs::path& corpus_dir) {
  return manifest_from_json(read_text_file(corpus_dir / "manifest.json"));
}

namespace {

void write_sidecar(const fs::path& dir, const CorpusManifest& m) {
  InstanceSidecar s;
  s.bif_type_counts = m.counts;
  for (const auto& [k, v] : m.counts) s.count += v;
  s.noise_kind = std::string(to_string(m.config.noise_kind));
  s.seed = m.config.seed;
  write_text_file_atomic(dir / "instances.json", sidecar_to_json(s) + "\n");
}

}  // namespace

CorpusManifest generate_corpus(const CorpusConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  if (cfg.output_dir.empty()) throw ArgumentError("output_dir must be set");
  fs::create_directories(cfg.output_dir);
  const fs::path inst_path = cfg.output_dir / "instances.csv";
  const fs::path meta_path = cfg.output_dir / "instances_meta.csv";
  const fs::path manifest_path = cfg.output_dir / "manifest.json";

  CorpusManifest m;
  m.config = cfg;
  m.counts = zero_counts();
  bool resume = false;
  if (fs::exists(manifest_path)) {
    CorpusManifest old = read_manifest(cfg.output_dir);
    // The attempt budget may be raised on resume; everything else must match.
    json want = config_to_json(cfg);
    json have = config_to_json(old.config);
    want.erase("max_attempts");
    have.erase("max_attempts");
    if (want != have) {
      throw ArgumentError("output directory holds a corpus generated with a different config");
    }
    old.config = cfg;
    if (old.complete) return old;
    m = old;
    resume = true;
  }
  if (resume) {
    if (!fs::exists(inst_path) || !fs::exists(meta_path) ||
        fs::file_size(inst_path) < m.instances_bytes || fs::file_size(meta_path) < m.meta_bytes) {
      throw DataError("corpus files are shorter than the manifest records");
    }
    fs::resize_file(inst_path, m.instances_bytes);
    fs::resize_file(meta_path, m.meta_bytes);
  } else {
    std::ofstream(inst_path, std::ios::binary | std::ios::trunc);
    std::ofstream meta(meta_path, std::ios::binary | std::ios::trunc);
    meta << kMetaHeader;
  }

  std::ofstream inst_out(inst_path, std::ios::binary | std::ios::app);
  std::ofstream meta_out(meta_path, std::ios::binary | std::ios::app);
  if (!inst_out || !meta_out) throw DataError("cannot open corpus files for writing");

  std::size_t written = 0;
  for (const auto& [k, v] : m.counts) written += v;
  const auto count_of = [&](BifurcationType t) -> std::size_t& {
    return m.counts[std::string(to_string(t))];
  };
  const auto all_full = [&] {
    for (auto t : kCorpusTypes) {
      if (count_of(t) < cfg.target_count_per_type) return false;
    }
    return true;
  };
  const auto save = [&] {
    inst_out.flush();
    meta_out.flush();
    m.instances_bytes = fs::file_size(inst_path);
    m.meta_bytes = fs::file_size(meta_path);
    m.content_hash.clear();
    write_text_file_atomic(manifest_path, manifest_to_json(m));
  };

  while (!all_full()) {
    if (m.next_system_index >= cfg.max_attempts) {
      save();
      throw PartialCorpusError("quota not reached after " + std::to_string(cfg.max_attempts) +
                                   " systems",
                               m.counts);
    }
    const std::size_t batch = static_cast<std::size_t>(std::min<std::uint64_t>(
        std::max<std::size_t>(1, cfg.batch_size), cfg.max_attempts - m.next_system_index));
    std::array<bool, 3> skip{};
    for (std::size_t i = 0; i < kCorpusTypes.size(); ++i) {
      skip[i] = count_of(kCorpusTypes[i]) >= cfg.target_count_per_type;
    }
    std::vector<SystemOutcome> results(batch);
    const std::uint64_t first = m.next_system_index;
    detail::parallel_for(batch, cfg.jobs, [&](std::size_t i) {
      results[i] = process_system(cfg, first + i, skip);
    });
    for (std::size_t i = 0; i < batch && !all_full(); ++i) {
      if (results[i].converged) ++m.systems_converged;
      for (const auto& g : results[i].instances) {
        auto& c = count_of(g.meta.bif_type);
        if (c >= cfg.target_count_per_type) continue;
        write_instance_row(inst_out, g.instance);
        meta_out << meta_row(written, g);
        ++written;
        ++c;
      }
      m.next_system_index = first + i + 1;
    }
    if (!inst_out || !meta_out) throw DataError("write to corpus files failed");
    save();
    if (progress) progress(m);
  }
  inst_out.close();
  meta_out.close();
  m.instances_bytes = fs::file_size(inst_path);
  m.meta_bytes = fs::file_size(meta_path);
  m.content_hash = git_blob_sha1_file(inst_path);
  m.complete = true;
  write_sidecar(cfg.output_dir, m);
  write_text_file_atomic(manifest_path, manifest_to_json(m));
  return m;
}

CorpusManifest make_null_corpus(const fs::path& source_dir, const fs::path& output_dir, Rng& rng) {
  const CorpusManifest src = read_manifest(source_dir);
  if (fs::equivalent(source_dir, output_dir.empty() ? source_dir : output_dir) ||
      (fs::exists(output_dir) && fs::equivalent(source_dir, output_dir))) {
    throw ArgumentError("null corpus must go to a different directory");
  }
  fs::create_directories(output_dir);
  std::ifstream in(source_dir / "instances.csv");
  if (!in) throw DataError("cannot open source instances");
  std::ostringstream outbuf;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream one(line + "\n");
    auto inst = read_instances(one);
    for (auto& x : inst) {
      std::shuffle(x.residual.begin() + static_cast<std::ptrdiff_t>(x.prefix), x.residual.end(),
                   rng);
      write_instance_row(outbuf, x);
    }
  }
  const fs::path inst_path = output_dir / "instances.csv";
  write_text_file_atomic(inst_path, outbuf.str());
  if (fs::exists(source_dir / "instances_meta.csv")) {
    fs::copy_file(source_dir / "instances_meta.csv", output_dir / "instances_meta.csv",
                  fs::copy_options::overwrite_existing);
  }
  CorpusManifest m = src;
  m.null_model = true;
  m.instances_bytes = fs::file_size(inst_path);
  m.meta_bytes =
      fs::exists(output_dir / "instances_meta.csv") ? fs::file_size(output_dir / "instances_meta.csv") : 0;
  m.content_hash = git_blob_sha1_file(inst_path);
  write_sidecar(output_dir, m);
  write_text_file_atomic(output_dir / "manifest.json", manifest_to_json(m));
  return m;
}

double corpus_label_mean(const fs::path& corpus_dir) {
  std::ifstream in(corpus_dir / "instances.csv");
  if (!in) throw DataError("cannot open " + (corpus_dir / "instances.csv").string());
  std::string line;
  double sum = 0.0;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto pos = line.find_last_of(',');
    if (pos == std::string::npos) continue;
    const auto v = parse_double(std::string_view(line).substr(pos + 1));
    if (!v) throw DataError("bad label in corpus");
    sum += *v;
    ++n;
  }
  if (n == 0) throw DataError("corpus has no instances");
  return sum / static_cast<double>(n);
}

// ---------------------------------------------------------------- test suites

std::string_view to_string(SamplingKind s) {
  return s == SamplingKind::regular ? "regular" : "irregular";
}

SamplingKind sampling_kind_from_string(std::string_view name) {
  if (name == "regular") return SamplingKind::regular;
  if (name == "irregular") return SamplingKind::irregular;
  throw ArgumentError("sampling must be regular or irregular, got " + std::string(name));
}

void TestSuiteConfig::validate() const {
  if (n_series == 0) throw ArgumentError("n_series must be > 0");
  if (min_length < 3 || max_length > kInstanceLength || min_length > max_length) {
    throw ArgumentError("series lengths must satisfy 3 <= min <= max <= 500");
  }
  if (!(min_rel_distance > 0.0) || !(max_rel_distance >= min_rel_distance)) {
    throw ArgumentError("relative distances must satisfy 0 < min <= max");
  }
  if (!(sigma >= 0.0)) throw ArgumentError("sigma must be >= 0");
}

std::vector<double> TestSuite::observed_series(std::size_t i) const {
  std::vector<double> out;
  out.reserve(series.at(i).x.size());
  for (const auto& s : series[i].x) out.push_back(s(observed));
  return out;
}

TippingLabel model_ground_truth(ModelId id, SweepDirection direction, double initial_value) {
  const ModelProfile p = model_profile(id, direction);
  const NamedModel model(id);
  const DynamicalSystem sys(model);
  const StateVector eq = model_equilibrium(model, p.x_guess, initial_value, p.dt);
  LabelOptions lo;
  lo.classify = false;
  TippingLabel label;
  try {
    label = label_ramped_run(sys, eq, RampSpec{initial_value, p.rate, p.mu_limit}, p.dt, lo);
  } catch (const NotFoundError&) {
    throw ArgumentError("tipping is not reached before the end of the sweep for " +
                        std::string(to_string(id)));
  }
  label.bif_type = p.expected_type;
  return label;
}

namespace {

std::vector<std::size_t> choose_steps(std::size_t last_step, std::size_t count,
                                      SamplingKind sampling, Rng& rng) {
  std::vector<std::size_t> steps;
  if (last_step + 1 < count) throw DataError("sweep too short for the requested samples");
  if (sampling == SamplingKind::regular) {
    for (std::size_t k = 0; k < count; ++k) {
      steps.push_back(static_cast<std::size_t>(std::llround(
          static_cast<double>(k) * static_cast<double>(last_step) / static_cast<double>(count - 1))));
    }
  } else {
    // Sorted uniform draw of distinct grid points.
    std::vector<std::size_t> all(last_step + 1);
    for (std::size_t i = 0; i <= last_step; ++i) all[i] = i;
    std::sample(all.begin(), all.end(), std::back_inserter(steps), count, rng);
  }
  return steps;
}

}  // namespace

TestSuite generate_test_suite(const TestSuiteConfig& cfg) {
  cfg.validate();
  const ModelProfile p =
      cfg.direction ? model_profile(cfg.model, *cfg.direction) : model_profile(cfg.model);
  TestSuite suite;
  suite.config = cfg;
  suite.config.direction = p.direction;
  suite.initial_values = cfg.initial_values.empty() ? p.initial_values : cfg.initial_values;
  suite.observed = p.observed;
  suite.noise = p.noise;
  suite.mu_c = model_ground_truth(cfg.model, p.direction, suite.initial_values.front()).mu_c;

  const NamedModel model(cfg.model);
  const DynamicalSystem sys(model);
  const double dir = p.rate > 0 ? 1.0 : -1.0;
  std::vector<StateVector> equilibria;
  for (double iv : suite.initial_values) {
    if (!(dir * (suite.mu_c - iv) > 0.0)) {
      throw ArgumentError("initial value " + format_double(iv) + " is not before the tipping point");
    }
    equilibria.push_back(model_equilibrium(model, p.x_guess, iv, p.dt));
  }

  const std::size_t n_iv = suite.initial_values.size();
  suite.series.resize(n_iv * cfg.n_series);
  detail::parallel_for(suite.series.size(), cfg.jobs, [&](std::size_t k) {
    const std::size_t i = k / cfg.n_series;
    const std::size_t j = k % cfg.n_series;
    const double iv = suite.initial_values[i];
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt >= 10) throw DataError("test series diverged repeatedly");
      Rng rng = make_rng(cfg.seed, {i, j, attempt});
      const auto len = static_cast<std::size_t>(uniform_integer(rng, cfg.min_length, cfg.max_length));
      const double d = uniform_real(rng, cfg.min_rel_distance, cfg.max_rel_distance);
      const double mu_end = (suite.mu_c + d * iv) / (1.0 + d);
      double phi = 0.0;
      if (p.noise == NoiseKind::red) {
        do {
          phi = uniform_real(rng, -1.0, 1.0);
        } while (!(std::abs(phi) < 1.0));
      }
      const NoiseSpec noise =
          p.noise == NoiseKind::red ? NoiseSpec::red(cfg.sigma, phi) : NoiseSpec::white(cfg.sigma);
      const RampSpec ramp{iv, p.rate, mu_end};
      const std::size_t last_step = ramp_steps(ramp, p.dt);
      const auto picks = choose_steps(last_step, len, cfg.sampling, rng);
      TestSeries ts;
      ts.initial_index = i;
      ts.initial_value = iv;
      ts.series_index = j;
      ts.phi = phi;
      try {
        const StateVector start = burn_in(sys, equilibria[i], iv, noise, p.dt, 100.0, &rng);
        std::size_t next = 0;
        RunOptions ro;
        ro.steps = last_step;
        run_observed(sys, start, ramp, noise, p.dt, &rng, ro, [&](const StepView& v) {
          while (next < picks.size() && picks[next] == v.step) {
            ts.mu.push_back(v.mu);
            ts.x.push_back(v.x);
            ++next;
          }
          return next < picks.size();
        });
      } catch (const NumericError&) {
        continue;
      }
      suite.series[k] = std::move(ts);
      break;
    }
  });
  return suite;
}

void write_test_suite(const TestSuite& suite, const fs::path& dir) {
  fs::create_directories(dir);
  const int dim = suite.series.empty() || suite.series.front().x.empty()
                      ? 1
                      : static_cast<int>(suite.series.front().x.front().size());
  std::ostringstream series;
  series << "series_id,initial_index,initial_value,series_index,mu";
  for (int c = 0; c < dim; ++c) series << ",x" << c;
  series << '\n';
  std::ostringstream instances;
  for (std::size_t k = 0; k < suite.series.size(); ++k) {
    const auto& s = suite.series[k];
    for (std::size_t n = 0; n < s.mu.size(); ++n) {
      series << k << ',' << s.initial_index << ',' << format_double(s.initial_value) << ','
             << s.series_index << ',' << format_double(s.mu[n]);
      for (int c = 0; c < dim; ++c) series << ',' << format_double(s.x[n](c));
      series << '\n';
    }
    write_instance_row(instances, encode_test_instance(s.mu, suite.observed_series(k), suite.mu_c));
  }
  write_text_file_atomic(dir / "series.csv", series.str());
  write_text_file_atomic(dir / "instances.csv", instances.str());

  json truth;
  truth["model_id"] = std::string(to_string(suite.config.model));
  truth["direction"] = std::string(to_string(suite.config.direction.value()));
  truth["mu_c"] = suite.mu_c;
  truth["initial_values"] = suite.initial_values;
  truth["n_series"] = suite.config.n_series;
  truth["sampling"] = std::string(to_string(suite.config.sampling));
  truth["seed"] = suite.config.seed;
  truth["observed"] = suite.observed;
  truth["noise_kind"] = std::string(to_string(suite.noise));
  truth["sigma"] = suite.config.sigma;
  truth["min_length"] = suite.config.min_length;
  truth["max_length"] = suite.config.max_length;
  truth["min_rel_distance"] = suite.config.min_rel_distance;
  truth["max_rel_distance"] = suite.config.max_rel_distance;
  write_text_file_atomic(dir / "ground_truth.json", truth.dump(2) + "\n");

  json manifest;
  manifest["series_hash"] = git_blob_sha1_file(dir / "series.csv");
  manifest["instances_hash"] = git_blob_sha1_file(dir / "instances.csv");
  manifest["series_count"] = suite.series.size();
  write_text_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

TestSuite read_test_suite(const fs::path& dir) {
  TestSuite suite;
  try {
    const json truth = json::parse(read_text_file(dir / "ground_truth.json"));
    suite.config.model = model_id_from_string(truth.at("model_id").get<std::string>());
    suite.config.direction = sweep_direction_from_string(truth.at("direction").get<std::string>());
    suite.mu_c = truth.at("mu_c").get<double>();
    suite.initial_values = truth.at("initial_values").get<std::vector<double>>();
    suite.config.initial_values = suite.initial_values;
    suite.config.n_series = truth.at("n_series").get<std::size_t>();
    suite.config.sampling = sampling_kind_from_string(truth.at("sampling").get<std::string>());
    suite.config.seed = truth.at("seed").get<std::uint64_t>();
    suite.observed = truth.at("observed").get<int>();
    suite.noise = noise_kind_from_string(truth.at("noise_kind").get<std::string>());
    suite.config.sigma = truth.value("sigma", 0.01);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid ground_truth.json: ") + e.what());
  }
  std::ifstream in(dir / "series.csv");
  if (!in) throw DataError("cannot open " + (dir / "series.csv").string());
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  if (header.size() < 6 || header[0] != "series_id") throw DataError("bad series.csv header");
  const int dim = static_cast<int>(header.size()) - 5;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw DataError("series.csv row " + std::to_string(row) + " is malformed");
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto d = parse_double(f[i]);
      if (!d) throw DataError("series.csv row " + std::to_string(row) + " has a non-number");
      v[i] = *d;
    }
    const auto k = static_cast<std::size_t>(v[0]);
    if (k >= suite.series.size()) suite.series.resize(k + 1);
    auto& s = suite.series[k];
    s.initial_index = static_cast<std::size_t>(v[1]);
    s.initial_value = v[2];
    s.series_index = static_cast<std::size_t>(v[3]);
    s.mu.push_back(v[4]);
    StateVector x(dim);
    for (int c = 0; c < dim; ++c) x(c) = v[5 + static_cast<std::size_t>(c)];
    s.x.push_back(x);
  }
  return suite;
}

}  // namespace tipcast
