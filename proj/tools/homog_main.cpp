// homog: config-driven pipeline for the stable-like periodic homogenization
// toolkit. Stages: validate -> invariant -> corrector -> homogenize -> verify,
// plus canned example presets.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "homog/errors.hpp"
#include "homog/parallel.hpp"
#include "homog/pipeline.hpp"

namespace {

int run(const std::string& stage, const std::string& config_path, const std::string& preset,
        const std::string& out_dir, std::optional<std::uint64_t> seed, unsigned threads) {
  if (threads > 0) homog::set_thread_count(threads);
  homog::ExperimentConfig cfg;
  if (!preset.empty()) {
    cfg = homog::expand_preset(preset);
  } else {
    if (config_path.empty()) throw homog::ConfigError("missing --config");
    cfg = homog::load_config(config_path);
  }
  if (seed) cfg.run.seed_base = *seed;
  // the output directory is runtime context, never part of the hashed config
  std::string out = !out_dir.empty() ? out_dir
                    : !cfg.run.out_dir.empty() ? cfg.run.out_dir
                                               : std::string("homog_out");
  auto res = homog::run_stage(cfg, stage, out);
  std::printf("%s\n", res.message.c_str());
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stable-like periodic homogenization pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset;
  std::uint64_t seed_value = 0;
  bool seed_set = false;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory for artifacts");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& v) {
          seed_value = v;
          seed_set = true;
        },
        "seed base override");
    sub->add_option("--threads", threads, "worker threads (default: HOMOG_THREADS or all cores)");
  };

  const std::pair<const char*, const char*> stages[] = {
      {"validate", "audit the model assumptions"},
      {"invariant", "estimate the cell invariant measure"},
      {"corrector", "solve the corrector equation"},
      {"homogenize", "assemble the homogenized Levy triplet"},
      {"verify", "statistical convergence report against the limit"},
      {"all", "full pipeline with artifact reuse"}};
  for (const auto& [name, desc] : stages) add_common(app.add_subcommand(name, desc), true);
  auto* example = app.add_subcommand("example", "run a canned preset end to end");
  example->add_option("preset", preset, "preset name")
      ->required()
      ->check(CLI::IsMember(homog::preset_names()));
  add_common(example, false);

  CLI11_PARSE(app, argc, argv);

  std::string stage = app.get_subcommands().front()->get_name();
  if (stage == "example") stage = "all";

  try {
    return run(stage, config_path, preset, out_dir,
               seed_set ? std::optional<std::uint64_t>(seed_value) : std::nullopt, threads);
  } catch (const homog::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return homog::kExitConfig;
  } catch (const homog::ValidationError& e) {
    std::fprintf(stderr, "validation failure: %s\n", e.what());
    return homog::kExitValidation;
  } catch (const homog::NumericsError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return homog::kExitNumerics;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return homog::kExitConfig;
  }
}
