#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cotlab/bounds.hpp"
#include "cotlab/model.hpp"
#include "cotlab/parallel.hpp"

namespace cotlab {

enum class Mode {
  kGenModel,
  kSample,
  kAmbiguity,
  kVerify,
  kSweepN,
  kLemmaThreshold,
  kMcCheck,
};

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

struct GeneratorSource {
  RandomModelParams params;
  std::uint64_t seed = 0;
};

// Everything a run needs; populated from CLI flags, optionally overridden by
// a JSON config file. Exactly one model source may be set.
struct ExperimentConfig {
  Mode mode = Mode::kVerify;

  std::string fixture;     // fixture name, e.g. "TINY-B"
  std::string model_path;  // model JSON file
  std::optional<GeneratorSource> generator;

  std::vector<int> n_examples = {1};     // N values
  std::vector<std::uint64_t> seeds;      // mandatory for sampling modes
  int tail_max_len = 3;
  std::optional<double> delta;
  int retry_budget = 1000;
  int n_chains = 10;          // sample / ambiguity / lemma-threshold / mc-check
  std::int64_t mc_samples = 10000;
  int min_len = 1;            // lemma-threshold: minimum trajectory length
  std::string context;        // pin the true context by id (optional)

  std::string out;  // CSV path (JSON path for gen-model and sample)
  std::string svg;  // optional plot path
  Exec exec = Exec::kParallel;
};

// Field-by-field validation; each message names the offending field.
std::vector<std::string> validate_config(const ExperimentConfig& config);

// Applies a JSON config document on top of `config` (file values win).
// Throws Error with the offending key on unknown fields or bad types.
void apply_config_json(const std::string& text, ExperimentConfig* config);

struct RunResult {
  int exit_code = 0;  // 0 ok; 1 usage/IO error; 2 inequality violation
  std::string message;
};

// Resolves the model source, validates the model, runs the requested mode,
// and writes the declared artifacts. Does not throw on config or inequality
// problems; those come back in the result.
RunResult run_experiment(const ExperimentConfig& config);

// Model resolution, exposed for tests and the CLI's gen-model path.
ModelSpec resolve_model(const ExperimentConfig& config);

// Instance sampling that retries (with derived substreams) when a chain
// fails to complete within max_len; used by the verify mode and harnesses.
PromptInstance sample_instance_with_retry(const ModelSpec& spec,
                                          std::optional<int> context,
                                          int n_examples, std::uint64_t seed,
                                          int budget);

}  // namespace cotlab
