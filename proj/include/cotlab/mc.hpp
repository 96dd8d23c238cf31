#pragma once

#include <cstdint>
#include <span>

#include "cotlab/model.hpp"
#include "cotlab/parallel.hpp"

namespace cotlab {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  double ess = 0.0;  // effective sample size, (sum w)^2 / sum w^2
};

// Importance-sampling estimate of prefix_prob_given_context. The proposal
// draws intentions from the model's own kernel along the fixed observed
// messages, so the weight of a sample is the product of its emission
// probabilities (with the transition probability into the terminal
// intention replacing the draw at a final stop symbol). Unbiased because the
// proposal covers the support of the target.
//
// Samples are drawn in fixed-size batches; batch j uses substream (seed, j)
// and batch statistics are merged in batch order, so serial and parallel
// execution produce identical estimates.
McEstimate mc_prefix_prob(const ModelSpec& spec, std::span<const int> messages,
                          int c, std::int64_t n_samples, std::uint64_t seed,
                          Exec exec = Exec::kParallel);

// Stratifies exactly over contexts: the prior-weighted sum of per-context
// estimates, each using n_samples draws from substream (seed, context).
McEstimate mc_marginal(const ModelSpec& spec, std::span<const int> messages,
                       std::int64_t n_samples, std::uint64_t seed,
                       Exec exec = Exec::kParallel);

}  // namespace cotlab
