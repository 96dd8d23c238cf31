#include "cotlab/ambiguity.hpp"

#include <algorithm>
#include <stdexcept>

#include "cotlab/errors.hpp"
#include "cotlab/inference.hpp"

namespace cotlab {

namespace {

double complement_of_truth_posterior(const ModelSpec& spec,
                                     std::span<const int> messages,
                                     int context,
                                     std::span<const int> intentions) {
  PosteriorResult posterior = posterior_latents(spec, messages);
  LatentExplanation truth{context, {intentions.begin(), intentions.end()}};
  double eps = 1.0 - posterior.probability_of(truth);
  return std::clamp(eps, 0.0, 1.0);
}

}  // namespace

double chain_ambiguity(const ModelSpec& spec, const LabeledChain& chain) {
  return complement_of_truth_posterior(spec, chain.messages, chain.context,
                                       chain.intentions);
}

double input_ambiguity(const ModelSpec& spec, const LabeledChain& input) {
  return complement_of_truth_posterior(spec, input.messages, input.context,
                                       input.intentions);
}

double skewness(const ModelSpec& spec, int true_context) {
  if (true_context < 0 || true_context >= spec.n_contexts()) {
    throw std::invalid_argument("skewness: context index out of range");
  }
  double ratio = 1.0;
  for (int c = 0; c < spec.n_contexts(); ++c) {
    if (spec.context_prior[c] <= 0.0) {
      throw ZeroPriorContext("skewness undefined: context '" +
                             spec.contexts[c] + "' has prior 0");
    }
    ratio = std::max(ratio, spec.context_prior[true_context] /
                                spec.context_prior[c]);
  }
  return ratio;
}

AmbiguityProfile ambiguity_profile(const ModelSpec& spec,
                                   const LabeledChain& chain) {
  AmbiguityProfile profile;
  profile.source_chain = chain;
  const int m = static_cast<int>(chain.messages.size());
  profile.lengths.reserve(m);
  profile.values.reserve(m);
  for (int len = 1; len <= m; ++len) {
    std::span<const int> messages(chain.messages.data(), len);
    std::span<const int> intentions(chain.intentions.data(), len);
    profile.lengths.push_back(len);
    profile.values.push_back(complement_of_truth_posterior(
        spec, messages, chain.context, intentions));
  }
  return profile;
}

std::optional<int> lemma1_threshold(const AmbiguityProfile& profile,
                                    double delta) {
  if (!(delta >= 0.0 && delta < 0.5)) {
    throw std::invalid_argument("lemma1_threshold: delta must lie in [0, 0.5)");
  }
  if (profile.values.empty()) return std::nullopt;
  // Last index whose value exceeds delta; the threshold is the next length.
  int first_ok = 0;
  for (int i = static_cast<int>(profile.values.size()) - 1; i >= 0; --i) {
    if (profile.values[i] > delta) {
      first_ok = i + 1;
      break;
    }
  }
  if (first_ok >= static_cast<int>(profile.values.size())) return std::nullopt;
  return profile.lengths[first_ok];
}

}  // namespace cotlab
