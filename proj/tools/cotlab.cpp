#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cotlab/errors.hpp"
#include "cotlab/experiment.hpp"
#include "cotlab/model_io.hpp"

namespace {

using cotlab::ExperimentConfig;

struct SubState {
  CLI::App* cmd = nullptr;
  cotlab::Mode mode;
  ExperimentConfig config;
  std::string config_path;
  bool serial = false;

  // Random-model generator flags; folded into config.generator when set.
  std::vector<int> generator_sizes;  // contexts intentions messages
  double alpha = 0.5;
  std::string family = "MARKOV";
  std::uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  double end_floor = 0.05;
  int max_len = 16;

  double delta = 0.0;
  bool delta_set = false;
};

// Model-source and execution flags shared by every subcommand. Seeds are
// mandatory wherever sampling happens; there is no wall-clock default.
void add_common_flags(SubState& sub) {
  CLI::App* cmd = sub.cmd;
  cmd->add_option("--fixture", sub.config.fixture,
                  "fixture name (TINY-A, TINY-B, SINGLE-C, SKEWED)");
  cmd->add_option("--model", sub.config.model_path, "model JSON file");
  cmd->add_option("--generator", sub.generator_sizes,
                  "random model sizes: contexts intentions messages")
      ->expected(3);
  cmd->add_option("--alpha", sub.alpha, "ambiguity dial in [0,1] for --generator");
  cmd->add_option("--family", sub.family,
                  "kernel family for --generator: MARKOV or FULL");
  cmd->add_option("--gen-seed", sub.gen_seed, "seed for --generator")
      ->each([&sub](const std::string&) { sub.gen_seed_set = true; });
  cmd->add_option("--end-floor", sub.end_floor,
                  "terminal-intention floor for --generator");
  cmd->add_option("--max-len", sub.max_len, "max chain length for --generator");
  cmd->add_option("--config", sub.config_path,
                  "JSON config file; its values override flags");
  cmd->add_flag("--serial", sub.serial, "disable the OpenMP work loops");
  cmd->add_option("-o,--out", sub.config.out, "output path");
}

void add_delta_flag(SubState& sub, const char* description) {
  sub.cmd->add_option("--delta", sub.delta, description)
      ->each([&sub](const std::string&) { sub.delta_set = true; });
}

int dispatch(SubState& sub) {
  ExperimentConfig config = sub.config;
  config.mode = sub.mode;
  if (sub.serial) config.exec = cotlab::Exec::kSerial;
  if (sub.delta_set) config.delta = sub.delta;
  try {
    if (!sub.generator_sizes.empty()) {
      if (!sub.gen_seed_set) {
        throw cotlab::Error("--gen-seed is required with --generator");
      }
      cotlab::GeneratorSource source;
      source.params.n_contexts = sub.generator_sizes[0];
      source.params.n_intentions = sub.generator_sizes[1];
      source.params.n_messages = sub.generator_sizes[2];
      source.params.ambiguity = sub.alpha;
      source.params.family = cotlab::kernel_family_from_string(sub.family);
      source.params.end_floor = sub.end_floor;
      source.params.max_len = sub.max_len;
      source.seed = sub.gen_seed;
      config.generator = source;
    }
    if (!sub.config_path.empty()) {
      cotlab::apply_config_json(cotlab::read_file(sub.config_path), &config);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  cotlab::RunResult result = cotlab::run_experiment(config);
  if (result.exit_code == 0) {
    std::cout << result.message << "\n";
  } else {
    std::cerr << "error: " << result.message << "\n";
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cotlab: exact inference and likelihood-gap bound checks for a "
      "hierarchical latent chain-of-thought generation model"};
  app.require_subcommand(1);

  std::vector<SubState> subs(7);

  auto make = [&](std::size_t i, cotlab::Mode mode, const char* description) -> SubState& {
    SubState& sub = subs[i];
    sub.mode = mode;
    sub.cmd = app.add_subcommand(std::string(cotlab::to_string(mode)), description);
    add_common_flags(sub);
    return sub;
  };

  make(0, cotlab::Mode::kGenModel, "write a fixture or random model as JSON");

  {
    SubState& sub = make(1, cotlab::Mode::kSample, "sample labeled chains as JSON");
    sub.cmd->add_option("--seeds", sub.config.seeds, "sampling seeds");
    sub.cmd->add_option("--chains", sub.config.n_chains, "chains per seed");
    sub.cmd->add_option("--context", sub.config.context, "pin the context id");
    sub.cmd->add_option("--retry-budget", sub.config.retry_budget,
                        "attempts per chain");
  }
  {
    SubState& sub = make(2, cotlab::Mode::kAmbiguity,
                         "ambiguity profiles of sampled chains (CSV)");
    sub.cmd->add_option("--seeds", sub.config.seeds, "sampling seeds");
    sub.cmd->add_option("--chains", sub.config.n_chains, "chains per seed");
    sub.cmd->add_option("--context", sub.config.context, "pin the context id");
    sub.cmd->add_option("--retry-budget", sub.config.retry_budget,
                        "attempts per chain");
    sub.cmd->add_option("--svg", sub.config.svg, "optional SVG plot path");
  }
  {
    SubState& sub = make(3, cotlab::Mode::kVerify,
                         "check the likelihood-gap bound on sampled instances (CSV)");
    sub.cmd->add_option("--n", sub.config.n_examples, "example counts N");
    sub.cmd->add_option("--seeds", sub.config.seeds, "instance seeds");
    sub.cmd->add_option("--tail-max-len", sub.config.tail_max_len,
                        "tail lengths to quantify over");
    add_delta_flag(sub, "Condition-1 delta in [0, 0.5) (reported as rho)");
    sub.cmd->add_option("--context", sub.config.context, "pin the context id");
    sub.cmd->add_option("--retry-budget", sub.config.retry_budget,
                        "instance sampling attempts");
  }
  {
    SubState& sub = make(4, cotlab::Mode::kSweepN,
                         "gap vs N sweep under the Condition-1 filter (CSV)");
    sub.cmd->add_option("--n", sub.config.n_examples, "example counts N");
    sub.cmd->add_option("--seeds", sub.config.seeds, "family seeds");
    add_delta_flag(sub, "Condition-1 delta in [0, 0.5)");
    sub.cmd->add_option("--tail-max-len", sub.config.tail_max_len,
                        "tail lengths to quantify over");
    sub.cmd->add_option("--retry-budget", sub.config.retry_budget,
                        "example resampling attempts");
    sub.cmd->add_option("--svg", sub.config.svg, "optional SVG plot path");
  }
  {
    SubState& sub = make(5, cotlab::Mode::kLemmaThreshold,
                         "length thresholds where ambiguity stays below delta (CSV)");
    sub.cmd->add_option("--seeds", sub.config.seeds, "sampling seeds");
    sub.cmd->add_option("--chains", sub.config.n_chains, "trajectories per seed");
    add_delta_flag(sub, "threshold delta in [0, 0.5)");
    sub.cmd->add_option("--min-len", sub.config.min_len,
                        "minimum trajectory length");
    sub.cmd->add_option("--context", sub.config.context, "pin the context id");
    sub.cmd->add_option("--retry-budget", sub.config.retry_budget,
                        "attempts per trajectory");
  }
  {
    SubState& sub = make(6, cotlab::Mode::kMcCheck,
                         "importance-sampling estimates vs exact marginals (CSV)");
    sub.cmd->add_option("--seeds", sub.config.seeds, "sampling seeds");
    sub.cmd->add_option("--chains", sub.config.n_chains, "target chains per seed");
    sub.cmd->add_option("--mc-samples", sub.config.mc_samples,
                        "samples per context");
    sub.cmd->add_option("--context", sub.config.context, "pin the context id");
    sub.cmd->add_option("--retry-budget", sub.config.retry_budget,
                        "attempts per chain");
  }

  CLI11_PARSE(app, argc, argv);

  for (SubState& sub : subs) {
    if (sub.cmd->parsed()) return dispatch(sub);
  }
  return 1;
}
