#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cotlab/model.hpp"

namespace cotlab {

// One latent explanation of a message sequence: a context plus one intention
// per message.
struct LatentExplanation {
  int context = -1;
  std::vector<int> intentions;

  friend bool operator==(const LatentExplanation&,
                         const LatentExplanation&) = default;
  friend auto operator<=>(const LatentExplanation& a,
                          const LatentExplanation& b) {
    if (auto cmp = a.context <=> b.context; cmp != 0) return cmp;
    return a.intentions <=> b.intentions;
  }
};

// Exact joint posterior over latent explanations given a message sequence.
// Entries cover the positive-probability support, in lexicographic order by
// (context, intention sequence), and sum to 1.
struct PosteriorResult {
  std::vector<std::pair<LatentExplanation, double>> entries;
  double evidence = 0.0;      // marginal probability of the messages
  double log_evidence = 0.0;

  double probability_of(const LatentExplanation& truth) const;
};

// Probability of a fully labeled chain: the product of the prior, initial
// intention, transition, and emission factors along the chain. Zero is a
// legitimate value.
double joint_prob(const ModelSpec& spec, const LabeledChain& chain);

// Probability that a document generated under context `c` begins with
// `messages`. A sequence ending in the stop symbol is treated as a complete
// document (final intention pinned to the terminal one); the stop symbol
// anywhere else makes the event impossible. Log-domain variants are the
// primitives; linear wrappers guard against silent underflow.
//
// Markov kernels use a forward recursion; full kernels (and the *_enum
// variant, for any family) sum over the positive-support tree of intention
// sequences.
double prefix_log_prob_given_context(const ModelSpec& spec,
                                     std::span<const int> messages, int c);
double prefix_log_prob_given_context_enum(const ModelSpec& spec,
                                          std::span<const int> messages,
                                          int c);
double prefix_prob_given_context(const ModelSpec& spec,
                                 std::span<const int> messages, int c);

// Marginal probability that a document begins with `messages`.
double marginal_log_prob(const ModelSpec& spec, std::span<const int> messages);
double marginal_prob(const ModelSpec& spec, std::span<const int> messages);

// Probability of observing N complete example documents together with one
// document beginning with `trailing`, all sharing a single context drawn
// from the prior: sum over contexts of the prior times the per-chain
// likelihood product.
double prompt_log_marginal(const ModelSpec& spec,
                           std::span<const std::vector<int>> examples,
                           std::span<const int> trailing);
double prompt_marginal(const ModelSpec& spec,
                       std::span<const std::vector<int>> examples,
                       std::span<const int> trailing);

// Exact posterior over (context, intention sequence) given `messages`.
// Throws ConditioningOnNullEvent when the messages have probability zero.
PosteriorResult posterior_latents(const ModelSpec& spec,
                                  std::span<const int> messages);

// Conditional likelihood that an idealized marginal-matching model assigns
// to `tail` after seeing the examples and the input prefix:
//   prompt_marginal(examples, input + tail) / prompt_marginal(examples, input).
double p_llm_conditional(const ModelSpec& spec, std::span<const int> tail,
                         std::span<const int> input,
                         std::span<const std::vector<int>> examples);

// True-language conditional of the same tail given the input prefix and the
// actual context.
double q_true_conditional(const ModelSpec& spec, std::span<const int> tail,
                          std::span<const int> input, int c);

// All message sequences of length 1..max_len in which the stop symbol
// appears only in final position; ordered by length, then lexicographically
// by message index.
std::vector<std::vector<int>> enumerate_tails(const ModelSpec& spec,
                                              int max_len);

// input + tail, the conditioning sequence used throughout the bound checks.
std::vector<int> concat(std::span<const int> input, std::span<const int> tail);

}  // namespace cotlab
