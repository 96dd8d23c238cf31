#pragma once

#include <optional>
#include <vector>

#include "cotlab/model.hpp"

namespace cotlab {

// Ambiguity of each prefix of one chain, in increasing prefix length. The
// final entry covers the whole chain.
struct AmbiguityProfile {
  std::vector<int> lengths;
  std::vector<double> values;
  LabeledChain source_chain;
};

// Ambiguity of a labeled chain: one minus the posterior probability of its
// true (context, intention sequence) given its messages. 0 means the
// messages pin down their latent explanation uniquely.
double chain_ambiguity(const ModelSpec& spec, const LabeledChain& chain);

// Ambiguity of an input prefix, i.e. the complement of the joint posterior
// of the prefix's true latents. Identical computation to chain_ambiguity;
// named separately because the bound treats the input factor differently.
double input_ambiguity(const ModelSpec& spec, const LabeledChain& input);

// Skewness of the context prior relative to the true context: the largest
// ratio of the true context's prior to any context's prior. 1 under a
// uniform prior. Throws ZeroPriorContext if some context has prior 0.
double skewness(const ModelSpec& spec, int true_context);

// Chain ambiguity evaluated along every prefix of `chain`, with the truth
// restricted to the prefix's latents.
AmbiguityProfile ambiguity_profile(const ModelSpec& spec,
                                   const LabeledChain& chain);

// Smallest profiled length from which every later value stays at or below
// delta; nullopt when even the final value exceeds delta (not found within
// the profiled horizon). delta must lie in [0, 0.5).
std::optional<int> lemma1_threshold(const AmbiguityProfile& profile,
                                    double delta);

}  // namespace cotlab
