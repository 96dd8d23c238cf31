#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cotlab/rng.hpp"

namespace cotlab {

// How much history the intention transition kernel conditions on.
//   kMarkov: only the last (intention, message) pair.
//   kFull:   the whole (intention, message) history, as an explicit table of
//            rows keyed by encoded histories plus a per-context fallback row
//            for histories that are not listed.
enum class KernelFamily { kMarkov, kFull };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

// History keys look like "t0:a|t1:b": one "intention:message" segment per
// generation step, in order. Markov rows use a single-segment key for the
// last pair. Identifier charsets are validated so keys parse unambiguously.
struct TransitionKernel {
  KernelFamily family = KernelFamily::kMarkov;
  // rows[context][history_key] -> probability vector over intentions.
  std::vector<std::unordered_map<std::string, std::vector<double>>> rows;
  // kFull only: rows[context] used for unlisted histories.
  std::vector<std::vector<double>> fallback;
};

// Discrete generative model of documents: a context is drawn once, then
// intentions evolve conditioned on the history and emit one message each,
// until the terminal intention emits the stop symbol.
struct ModelSpec {
  std::vector<std::string> contexts;
  std::vector<std::string> intentions;  // includes the terminal intention
  std::vector<std::string> messages;    // includes the stop symbol

  int terminal_intention = -1;  // index into intentions
  int stop_symbol = -1;         // index into messages

  std::vector<double> context_prior;                // [context]
  std::vector<std::vector<double>> init_intention;  // [context][intention]
  TransitionKernel transitions;
  std::vector<std::vector<double>> emission;  // [intention][message]

  // Maximum chain length, counting the stop symbol.
  int max_len = 32;
  // Minimum probability every transition row gives the terminal intention.
  double end_floor = 0.05;

  int n_contexts() const { return static_cast<int>(contexts.size()); }
  int n_intentions() const { return static_cast<int>(intentions.size()); }
  int n_messages() const { return static_cast<int>(messages.size()); }

  int context_index(std::string_view id) const;
  int intention_index(std::string_view id) const;
  int message_index(std::string_view id) const;

  static void append_history_key(std::string& key, const ModelSpec& spec,
                                 int intention, int message);
  std::string history_key(std::span<const std::pair<int, int>> history) const;

  // Transition row for the given context and encoded history key. For Markov
  // kernels the key must be the single last pair; for full kernels unlisted
  // histories resolve to the fallback row. Returns nullptr only for a Markov
  // key with no row (a validation error when the pair is reachable).
  const std::vector<double>* transition_row(int context,
                                            const std::string& key) const;
};

// One document with its latent explanation attached.
struct LabeledChain {
  std::vector<int> messages;    // indices into spec.messages
  int context = -1;             // ground-truth context index
  std::vector<int> intentions;  // ground-truth intention per message
  bool complete = false;        // last message is the stop symbol
};

// N example chains plus an input prefix, all generated under one context.
struct PromptInstance {
  std::vector<LabeledChain> examples;
  LabeledChain input;
  int true_context = -1;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every structural invariant of the model: vector shapes, probability
// normalization, stop-symbol emission rules, absorbing terminal intention,
// the end_floor guarantee, and row coverage for reachable Markov pairs.
// Violations are data, not exceptions; each one names the offending row.
ValidationReport validate_model(const ModelSpec& spec);

// Samples one complete chain under `context` by running the generative
// process. Throws TruncationError if the stop symbol is not reached within
// max_len messages.
LabeledChain sample_chain(const ModelSpec& spec, int context, Rng& rng);
LabeledChain sample_chain(const ModelSpec& spec, int context,
                          std::uint64_t seed);

// Samples just (theta_0, x_0): the input prefix of a fresh document.
LabeledChain sample_input_prefix(const ModelSpec& spec, int context, Rng& rng);

// Draws the context from the prior, then n_examples complete chains and one
// input prefix, independently given that context. Substream layout: context
// uses stream 0, example k uses stream k+1, the input uses stream
// n_examples+1, so results do not depend on evaluation order.
PromptInstance sample_prompt_instance(const ModelSpec& spec, int n_examples,
                                      std::uint64_t seed);
// Same, with the context pinned instead of drawn.
PromptInstance sample_prompt_instance_for_context(const ModelSpec& spec,
                                                  int context, int n_examples,
                                                  std::uint64_t seed);

// Canonical fixtures: TINY-A (unambiguous), TINY-B (ambiguous), SINGLE-C
// (one context), SKEWED (non-uniform prior). Throws std::invalid_argument
// for unknown names.
ModelSpec make_fixture(std::string_view name);

struct RandomModelParams {
  int n_contexts = 2;
  int n_intentions = 3;  // including the terminal intention
  int n_messages = 4;    // including the stop symbol
  // 0 gives each intention a disjoint emission block (and each context a
  // disjoint intention block, so chains are unambiguous); 1 makes all
  // emission rows uniform over content messages.
  double ambiguity = 0.5;
  KernelFamily family = KernelFamily::kMarkov;
  double end_floor = 0.05;
  int max_len = 16;
};

// Random model with the emission-overlap dial above. Init and transition
// rows are flat-Dirichlet draws; transition rows are then mixed with an
// end_floor point mass on the terminal intention. Full-family kernels
// tabulate all depth-1 and depth-2 histories and use the fallback row
// beyond. Throws std::invalid_argument for infeasible sizes.
ModelSpec generate_random_model(const RandomModelParams& params,
                                std::uint64_t seed);

}  // namespace cotlab
