#include <iostream>
#include <memory>

#include "cli_common.hpp"
#include "tipcast/pipeline.hpp"

namespace tipcast::cli {

namespace {

struct GenerateArgs {
  std::size_t count_per_type = 2000;
  std::string noise = "white";
  std::uint64_t seed = 0;
  std::string out;
  unsigned jobs = 1;
  std::size_t batch_size = 32;
  std::size_t max_attempts = 1000000;
  std::size_t base_sweep_steps = 100000;
  std::size_t runs_per_bifurcation = 5;
  std::string null_from;
  bool quiet = false;
};

}  // namespace

Runner add_generate(CLI::App& root) {
  auto* app = root.add_subcommand("generate", "Generate a training corpus, or its null-model twin");
  auto a = std::make_shared<GenerateArgs>();
  option(*app, "count-per-type", a->count_per_type, "Instances per bifurcation type")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  option(*app, "noise", a->noise, "Noise kind")
      ->check(CLI::IsMember({"white", "red"}))
      ->capture_default_str();
  option(*app, "seed", a->seed, "Global seed")->capture_default_str();
  option(*app, "out", a->out, "Output directory")->required();
  option(*app, "jobs", a->jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  option(*app, "batch-size", a->batch_size, "Systems per checkpoint")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  option(*app, "max-attempts", a->max_attempts, "Systems to try before giving up")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  option(*app, "base-sweep-steps", a->base_sweep_steps, "Steps of the slowest sweep")
      ->capture_default_str();
  option(*app, "runs-per-bifurcation", a->runs_per_bifurcation, "Ramped runs per bifurcation")
      ->check(CLI::Range(1, 10))
      ->capture_default_str();
  option(*app, "null-from", a->null_from,
         "Write the null-model twin of this corpus to --out instead of generating");
  flag(*app, "quiet", a->quiet, "No progress output");

  return [app, a]() -> int {
    const std::filesystem::path out(a->out);
    if (!a->null_from.empty()) {
      Rng rng = make_rng(a->seed, {0x6e756c6cULL});
      const CorpusManifest m = make_null_corpus(a->null_from, out, rng);
      write_config_echo(*app, out);
      std::cout << "null corpus " << out.string() << " hash " << m.content_hash << "\n";
      return 0;
    }
    CorpusConfig cfg;
    cfg.target_count_per_type = a->count_per_type;
    cfg.noise_kind = noise_kind_from_string(a->noise);
    cfg.seed = a->seed;
    cfg.output_dir = out;
    cfg.jobs = a->jobs;
    cfg.batch_size = a->batch_size;
    cfg.max_attempts = a->max_attempts;
    cfg.base_sweep_steps = a->base_sweep_steps;
    cfg.runs_per_bifurcation = a->runs_per_bifurcation;
    cfg.validate();
    write_config_echo(*app, out);
    const bool quiet = a->quiet;
    const auto progress = [quiet](const CorpusManifest& m) {
      if (quiet) return;
      std::cerr << "systems " << m.next_system_index;
      for (const auto& [k, v] : m.counts) std::cerr << ' ' << k << '=' << v;
      std::cerr << '\n';
    };
    try {
      const CorpusManifest m = generate_corpus(cfg, progress);
      std::size_t total = 0;
      for (const auto& [k, v] : m.counts) total += v;
      std::cout << "corpus " << out.string() << " instances " << total << " hash "
                << m.content_hash << "\n";
    } catch (const PartialCorpusError& e) {
      std::cerr << "error: " << e.what() << ";";
      for (const auto& [k, v] : e.counts()) std::cerr << ' ' << k << '=' << v;
      std::cerr << "\n";
      return 1;
    }
    return 0;
  };
}

}  // namespace tipcast::cli
