#include "oracle.hpp"

#include <string>

namespace oracle {

using cotlab::LabeledChain;
using cotlab::ModelSpec;

namespace {

// Own tiny key builder so the oracle does not share the library's.
std::string key_for(const ModelSpec& spec, const std::vector<int>& intentions,
                    const std::vector<int>& messages, std::size_t upto) {
  std::string key;
  std::size_t first =
      spec.transitions.family == cotlab::KernelFamily::kMarkov ? upto - 1 : 0;
  for (std::size_t i = first; i < upto; ++i) {
    if (!key.empty()) key += '|';
    key += spec.intentions[intentions[i]] + ":" + spec.messages[messages[i]];
  }
  return key;
}

bool next_assignment(std::vector<int>& digits, int base) {
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (++digits[i] < base) return true;
    digits[i] = 0;
  }
  return false;
}

bool interior_stop(const ModelSpec& spec, const std::vector<int>& messages) {
  for (std::size_t i = 0; i + 1 < messages.size(); ++i) {
    if (messages[i] == spec.stop_symbol) return true;
  }
  return false;
}

}  // namespace

double path_prob(const ModelSpec& spec, int c,
                 const std::vector<int>& intentions,
                 const std::vector<int>& messages) {
  double p = spec.init_intention[c][intentions[0]];
  p *= spec.emission[intentions[0]][messages[0]];
  for (std::size_t i = 1; i < messages.size() && p > 0.0; ++i) {
    const std::vector<double>* row =
        spec.transition_row(c, key_for(spec, intentions, messages, i));
    if (row == nullptr) return 0.0;
    p *= (*row)[intentions[i]];
    p *= spec.emission[intentions[i]][messages[i]];
  }
  return p;
}

double prefix_prob(const ModelSpec& spec, const std::vector<int>& messages,
                   int c) {
  if (messages.empty()) return 1.0;
  if (interior_stop(spec, messages)) return 0.0;
  std::vector<int> intentions(messages.size(), 0);
  double total = 0.0;
  do {
    total += path_prob(spec, c, intentions, messages);
  } while (next_assignment(intentions, spec.n_intentions()));
  return total;
}

double marginal_prob(const ModelSpec& spec, const std::vector<int>& messages) {
  double total = 0.0;
  for (int c = 0; c < spec.n_contexts(); ++c) {
    total += spec.context_prior[c] * prefix_prob(spec, messages, c);
  }
  return total;
}

std::map<std::pair<int, std::vector<int>>, double> posterior(
    const ModelSpec& spec, const std::vector<int>& messages,
    double* evidence) {
  std::map<std::pair<int, std::vector<int>>, double> joints;
  double total = 0.0;
  if (!interior_stop(spec, messages)) {
    for (int c = 0; c < spec.n_contexts(); ++c) {
      std::vector<int> intentions(messages.size(), 0);
      do {
        double p = spec.context_prior[c] *
                   path_prob(spec, c, intentions, messages);
        if (p > 0.0) {
          joints[{c, intentions}] = p;
          total += p;
        }
      } while (next_assignment(intentions, spec.n_intentions()));
    }
  }
  *evidence = total;
  for (auto& [key, p] : joints) p /= total;
  return joints;
}

double prompt_marginal(const ModelSpec& spec,
                       const std::vector<std::vector<int>>& examples,
                       const std::vector<int>& trailing) {
  double total = 0.0;
  for (int c = 0; c < spec.n_contexts(); ++c) {
    double term = spec.context_prior[c];
    for (const auto& example : examples) term *= prefix_prob(spec, example, c);
    term *= prefix_prob(spec, trailing, c);
    total += term;
  }
  return total;
}

double prompt_marginal_two_chains_joint(const ModelSpec& spec,
                                        const std::vector<int>& first,
                                        const std::vector<int>& second) {
  double total = 0.0;
  for (int c = 0; c < spec.n_contexts(); ++c) {
    std::vector<int> theta_first(first.size(), 0);
    do {
      const double p_first = path_prob(spec, c, theta_first, first);
      if (p_first == 0.0) continue;
      std::vector<int> theta_second(second.size(), 0);
      do {
        total += spec.context_prior[c] * p_first *
                 path_prob(spec, c, theta_second, second);
      } while (next_assignment(theta_second, spec.n_intentions()));
    } while (next_assignment(theta_first, spec.n_intentions()));
  }
  return total;
}

double chain_ambiguity(const ModelSpec& spec, const LabeledChain& chain) {
  double evidence = 0.0;
  auto joints = posterior(spec, chain.messages, &evidence);
  auto it = joints.find({chain.context, chain.intentions});
  return 1.0 - (it == joints.end() ? 0.0 : it->second);
}

}  // namespace oracle
