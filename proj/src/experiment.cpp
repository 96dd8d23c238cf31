#include "cotlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "cotlab/ambiguity.hpp"
#include "cotlab/csv.hpp"
#include "cotlab/errors.hpp"
#include "cotlab/inference.hpp"
#include "cotlab/mc.hpp"
#include "cotlab/model_io.hpp"
#include "cotlab/svg.hpp"

namespace cotlab {

namespace {

using Json = nlohmann::json;

std::string join_message_ids(const ModelSpec& spec,
                             std::span<const int> messages) {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) out += ';';
    out += spec.messages[messages[i]];
  }
  return out;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kGenModel: return "gen-model";
    case Mode::kSample: return "sample";
    case Mode::kAmbiguity: return "ambiguity";
    case Mode::kVerify: return "verify";
    case Mode::kSweepN: return "sweep-n";
    case Mode::kLemmaThreshold: return "lemma-threshold";
    case Mode::kMcCheck: return "mc-check";
  }
  return "?";
}

Mode mode_from_string(std::string_view name) {
  for (Mode mode : {Mode::kGenModel, Mode::kSample, Mode::kAmbiguity,
                    Mode::kVerify, Mode::kSweepN, Mode::kLemmaThreshold,
                    Mode::kMcCheck}) {
    if (to_string(mode) == name) return mode;
  }
  throw Error("mode: unknown value '" + std::string(name) + "'");
}

std::vector<std::string> validate_config(const ExperimentConfig& config) {
  std::vector<std::string> problems;
  int sources = 0;
  if (!config.fixture.empty()) ++sources;
  if (!config.model_path.empty()) ++sources;
  if (config.generator.has_value()) ++sources;
  if (sources != 1) {
    problems.push_back(
        "model source: exactly one of fixture, model, generator must be set");
  }
  const bool needs_seeds = config.mode != Mode::kGenModel;
  if (needs_seeds && config.seeds.empty()) {
    problems.push_back("seeds: at least one seed is required (no wall-clock default)");
  }
  if (config.mode == Mode::kSweepN && config.n_examples.empty()) {
    problems.push_back("n: sweep-n needs a non-empty N list");
  }
  for (int n : config.n_examples) {
    if (n < 0) problems.push_back("n: N values must be non-negative");
  }
  if (config.delta.has_value() &&
      !(*config.delta >= 0.0 && *config.delta < 0.5)) {
    problems.push_back("delta: must lie in [0, 0.5)");
  }
  if ((config.mode == Mode::kSweepN || config.mode == Mode::kLemmaThreshold) &&
      !config.delta.has_value()) {
    problems.push_back("delta: required for this mode");
  }
  if (config.tail_max_len < 1) problems.push_back("tail_max_len: must be >= 1");
  if (config.retry_budget < 1) problems.push_back("retry_budget: must be >= 1");
  if (config.n_chains < 1) problems.push_back("chains: must be >= 1");
  if (config.mc_samples < 1) problems.push_back("mc_samples: must be >= 1");
  if (config.min_len < 1) problems.push_back("min_len: must be >= 1");
  if (config.out.empty()) problems.push_back("out: output path is required");
  return problems;
}

void apply_config_json(const std::string& text, ExperimentConfig* config) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("config JSON: parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error("config JSON: expected an object");

  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "mode") {
        config->mode = mode_from_string(value.get<std::string>());
      } else if (key == "fixture") {
        config->fixture = value.get<std::string>();
      } else if (key == "model") {
        config->model_path = value.get<std::string>();
      } else if (key == "generator") {
        GeneratorSource source;
        source.params.n_contexts = value.at("contexts").get<int>();
        source.params.n_intentions = value.at("intentions").get<int>();
        source.params.n_messages = value.at("messages").get<int>();
        source.params.ambiguity = value.at("ambiguity").get<double>();
        source.params.family =
            kernel_family_from_string(value.value("family", "MARKOV"));
        source.params.end_floor = value.value("end_floor", 0.05);
        source.params.max_len = value.value("max_len", 16);
        source.seed = value.at("seed").get<std::uint64_t>();
        config->generator = source;
      } else if (key == "n") {
        config->n_examples = value.get<std::vector<int>>();
      } else if (key == "seeds") {
        config->seeds = value.get<std::vector<std::uint64_t>>();
      } else if (key == "tail_max_len") {
        config->tail_max_len = value.get<int>();
      } else if (key == "delta") {
        config->delta = value.get<double>();
      } else if (key == "retry_budget") {
        config->retry_budget = value.get<int>();
      } else if (key == "chains") {
        config->n_chains = value.get<int>();
      } else if (key == "mc_samples") {
        config->mc_samples = value.get<std::int64_t>();
      } else if (key == "min_len") {
        config->min_len = value.get<int>();
      } else if (key == "context") {
        config->context = value.get<std::string>();
      } else if (key == "out") {
        config->out = value.get<std::string>();
      } else if (key == "svg") {
        config->svg = value.get<std::string>();
      } else if (key == "threads") {
        const std::string v = value.get<std::string>();
        if (v == "serial") {
          config->exec = Exec::kSerial;
        } else if (v == "parallel") {
          config->exec = Exec::kParallel;
        } else {
          throw Error("config JSON: threads must be 'serial' or 'parallel'");
        }
      } else {
        throw Error("config JSON: unknown field '" + key + "'");
      }
    } catch (const Json::exception& e) {
      throw Error("config JSON: field '" + key + "': " + e.what());
    }
  }
}

ModelSpec resolve_model(const ExperimentConfig& config) {
  if (!config.fixture.empty()) return make_fixture(config.fixture);
  if (!config.model_path.empty()) return load_model(config.model_path);
  if (config.generator.has_value()) {
    return generate_random_model(config.generator->params,
                                 config.generator->seed);
  }
  throw Error("model source: none set");
}

PromptInstance sample_instance_with_retry(const ModelSpec& spec,
                                          std::optional<int> context,
                                          int n_examples, std::uint64_t seed,
                                          int budget) {
  Rng base(seed);
  for (int attempt = 0; attempt < budget; ++attempt) {
    Rng stream = base.substream(attempt);
    const std::uint64_t attempt_seed = stream.next_u64();
    try {
      if (context.has_value()) {
        return sample_prompt_instance_for_context(spec, *context, n_examples,
                                                  attempt_seed);
      }
      return sample_prompt_instance(spec, n_examples, attempt_seed);
    } catch (const TruncationError&) {
      continue;
    }
  }
  throw TruncationError(
      "no prompt instance with complete chains within the retry budget");
}

namespace {

std::optional<int> pinned_context(const ModelSpec& spec,
                                  const ExperimentConfig& config) {
  if (config.context.empty()) return std::nullopt;
  int index = spec.context_index(config.context);
  if (index < 0) throw Error("context: unknown id '" + config.context + "'");
  return index;
}

// Chains for the sampling modes: context drawn from the prior (or pinned),
// chain from a per-index substream, retrying truncated draws.
std::vector<LabeledChain> sample_chains(const ModelSpec& spec,
                                        std::optional<int> context, int count,
                                        std::uint64_t seed, int budget,
                                        int min_len = 1) {
  std::vector<LabeledChain> chains;
  Rng base(seed);
  std::uint64_t index = 0;
  int attempts_left = budget * std::max(count, 1);
  while (static_cast<int>(chains.size()) < count && attempts_left > 0) {
    --attempts_left;
    Rng stream = base.substream(index++);
    int c = context.has_value()
                ? *context
                : stream.next_categorical(spec.context_prior);
    try {
      LabeledChain chain = sample_chain(spec, c, stream);
      if (static_cast<int>(chain.messages.size()) >= min_len) {
        chains.push_back(std::move(chain));
      }
    } catch (const TruncationError&) {
    }
  }
  if (static_cast<int>(chains.size()) < count) {
    throw TruncationError("could not sample " + std::to_string(count) +
                          " chains meeting the length requirement within the retry budget");
  }
  return chains;
}

RunResult run_gen_model(const ModelSpec& spec, const ExperimentConfig& config) {
  save_model(spec, config.out);
  return {0, "model written to " + config.out};
}

RunResult run_sample(const ModelSpec& spec, const ExperimentConfig& config) {
  std::vector<LabeledChain> all;
  for (std::uint64_t seed : config.seeds) {
    std::vector<LabeledChain> chains =
        sample_chains(spec, pinned_context(spec, config), config.n_chains,
                      seed, config.retry_budget);
    all.insert(all.end(), chains.begin(), chains.end());
  }
  write_file(config.out, chains_to_json(spec, all));
  return {0, std::to_string(all.size()) + " chains written to " + config.out};
}

RunResult run_ambiguity(const ModelSpec& spec, const ExperimentConfig& config) {
  CsvTable table;
  table.header = {"seed", "chain_index", "prefix_len", "epsilon"};
  std::vector<SvgSeries> series;
  for (std::uint64_t seed : config.seeds) {
    std::vector<LabeledChain> chains =
        sample_chains(spec, pinned_context(spec, config), config.n_chains,
                      seed, config.retry_budget);
    for (std::size_t i = 0; i < chains.size(); ++i) {
      AmbiguityProfile profile = ambiguity_profile(spec, chains[i]);
      SvgSeries s;
      s.label = "seed " + std::to_string(seed) + " #" + std::to_string(i);
      for (std::size_t p = 0; p < profile.values.size(); ++p) {
        table.rows.push_back({static_cast<std::int64_t>(seed),
                              static_cast<std::int64_t>(i),
                              static_cast<std::int64_t>(profile.lengths[p]),
                              profile.values[p]});
        s.x.push_back(profile.lengths[p]);
        s.y.push_back(profile.values[p]);
      }
      series.push_back(std::move(s));
    }
  }
  write_csv(table, config.out);
  if (!config.svg.empty()) {
    SvgOptions options;
    options.title = "ambiguity vs prefix length";
    options.x_label = "prefix length";
    options.y_label = "epsilon";
    write_svg(series, options, config.svg);
  }
  return {0, "ambiguity profiles written to " + config.out};
}

RunResult run_verify(const ModelSpec& spec, const ExperimentConfig& config) {
  CsvTable table;
  table.header = {"n",
                  "seed",
                  "c_star",
                  "eps_input",
                  "eta",
                  "eta_hat",
                  "gamma",
                  "max_gap",
                  "rhs_uniform",
                  "rhs_nonuniform",
                  "tail_mass_max",
                  "prompt_mass",
                  "input_ratio",
                  "reconstruction_max_dev",
                  "vacuous",
                  "all_hold"};
  bool all_hold = true;
  std::optional<int> context = pinned_context(spec, config);
  for (int n : config.n_examples) {
    for (std::uint64_t seed : config.seeds) {
      PromptInstance instance = sample_instance_with_retry(
          spec, context, n, seed, config.retry_budget);
      BoundReport report = verify_instance(spec, instance, config.tail_max_len,
                                           config.delta, config.exec);
      all_hold = all_hold && report.holds.all();
      table.rows.push_back({static_cast<std::int64_t>(n),
                            static_cast<std::int64_t>(seed),
                            spec.contexts[instance.true_context],
                            report.eps_input, report.eta, report.eta_hat,
                            report.gamma, report.max_gap, report.rhs_uniform,
                            report.rhs_nonuniform, report.proof.tail_mass_max,
                            report.proof.prompt_mass, report.proof.input_ratio,
                            report.proof.reconstruction_max_dev,
                            report.vacuous, report.holds.all()});
    }
  }
  write_csv(table, config.out);
  if (!all_hold) {
    return {2, "inequality violation: see " + config.out};
  }
  return {0, "verified; report written to " + config.out};
}

RunResult run_sweep(const ModelSpec& spec, const ExperimentConfig& config) {
  std::vector<int> n_values = config.n_examples;
  std::sort(n_values.begin(), n_values.end());
  std::vector<SweepRow> rows =
      geometric_sweep(spec, *config.delta, n_values, config.seeds,
                      config.tail_max_len, config.retry_budget, config.exec);
  CsvTable table;
  table.header = {"N", "max_gap", "rhs_uniform", "eta_rho_pow_n",
                  "condition1_satisfied"};
  bool all_hold = true;
  for (const SweepRow& row : rows) {
    all_hold = all_hold && row.all_hold;
    table.rows.push_back({static_cast<std::int64_t>(row.n_examples),
                          row.max_gap, row.rhs_uniform, row.eta_rho_pow_n,
                          row.condition1_satisfied});
  }
  write_csv(table, config.out);
  if (!config.svg.empty()) {
    SvgSeries gap{"max_gap", {}, {}};
    SvgSeries rhs{"rhs_uniform", {}, {}};
    SvgSeries geo{"eta*rho^N", {}, {}};
    for (const SweepRow& row : rows) {
      gap.x.push_back(row.n_examples);
      gap.y.push_back(row.max_gap);
      rhs.x.push_back(row.n_examples);
      rhs.y.push_back(row.rhs_uniform);
      geo.x.push_back(row.n_examples);
      geo.y.push_back(row.eta_rho_pow_n);
    }
    SvgOptions options;
    options.title = "likelihood gap vs number of examples";
    options.x_label = "N";
    options.y_label = "gap";
    options.log_y = true;
    std::vector<SvgSeries> series = {gap, rhs, geo};
    write_svg(series, options, config.svg);
  }
  if (!all_hold) return {2, "inequality violation: see " + config.out};
  return {0, "sweep written to " + config.out};
}

RunResult run_lemma_threshold(const ModelSpec& spec,
                              const ExperimentConfig& config) {
  CsvTable table;
  table.header = {"seed", "chain_index", "length", "m_star"};
  for (std::uint64_t seed : config.seeds) {
    std::vector<LabeledChain> chains =
        sample_chains(spec, pinned_context(spec, config), config.n_chains,
                      seed, config.retry_budget, config.min_len);
    for (std::size_t i = 0; i < chains.size(); ++i) {
      AmbiguityProfile profile = ambiguity_profile(spec, chains[i]);
      std::optional<int> threshold = lemma1_threshold(profile, *config.delta);
      CsvValue m_star = threshold.has_value()
                            ? CsvValue(static_cast<std::int64_t>(*threshold))
                            : CsvValue(std::string("NOT_FOUND"));
      table.rows.push_back({static_cast<std::int64_t>(seed),
                            static_cast<std::int64_t>(i),
                            static_cast<std::int64_t>(chains[i].messages.size()),
                            m_star});
    }
  }
  write_csv(table, config.out);
  return {0, "thresholds written to " + config.out};
}

RunResult run_mc_check(const ModelSpec& spec, const ExperimentConfig& config) {
  CsvTable table;
  table.header = {"seed",      "chain_index", "messages", "exact",
                  "estimate",  "std_error",   "ess",      "n_samples",
                  "within_4se"};
  for (std::uint64_t seed : config.seeds) {
    std::vector<LabeledChain> chains =
        sample_chains(spec, pinned_context(spec, config), config.n_chains,
                      seed, config.retry_budget);
    Rng mc_base = Rng(seed).substream(0xABCDEF);  // distinct from chain streams
    for (std::size_t i = 0; i < chains.size(); ++i) {
      const double exact = marginal_prob(spec, chains[i].messages);
      Rng stream = mc_base.substream(i);
      McEstimate estimate =
          mc_marginal(spec, chains[i].messages, config.mc_samples,
                      stream.next_u64(), config.exec);
      // Zero-variance targets make the estimate exactly the constant weight;
      // the 1e-12 slack covers the different rounding of the exact path.
      const bool within =
          std::abs(estimate.value - exact) <= 4.0 * estimate.std_error + 1e-12;
      table.rows.push_back(
          {static_cast<std::int64_t>(seed), static_cast<std::int64_t>(i),
           join_message_ids(spec, chains[i].messages), exact, estimate.value,
           estimate.std_error, estimate.ess, estimate.n_samples, within});
    }
  }
  write_csv(table, config.out);
  return {0, "estimates written to " + config.out};
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  std::vector<std::string> problems = validate_config(config);
  if (!problems.empty()) {
    std::string message = "invalid config:";
    for (const std::string& p : problems) message += "\n  " + p;
    return {1, message};
  }
  try {
    ModelSpec spec = resolve_model(config);
    ValidationReport validation = validate_model(spec);
    if (!validation.ok()) {
      std::string message = "model failed validation:";
      for (const std::string& v : validation.violations) message += "\n  " + v;
      return {1, message};
    }
    switch (config.mode) {
      case Mode::kGenModel: return run_gen_model(spec, config);
      case Mode::kSample: return run_sample(spec, config);
      case Mode::kAmbiguity: return run_ambiguity(spec, config);
      case Mode::kVerify: return run_verify(spec, config);
      case Mode::kSweepN: return run_sweep(spec, config);
      case Mode::kLemmaThreshold: return run_lemma_threshold(spec, config);
      case Mode::kMcCheck: return run_mc_check(spec, config);
    }
    return {1, "unhandled mode"};
  } catch (const std::exception& e) {
    return {1, e.what()};
  }
}

}  // namespace cotlab
