#pragma once

// Brute-force reference implementations used only by tests. Everything here
// enumerates the full |Theta|^length latent space with plain loops and linear
// arithmetic, independently of the library's recursions, so the two paths
// can check each other.

#include <map>
#include <utility>
#include <vector>

#include "cotlab/model.hpp"

namespace oracle {

// Probability of one fully specified latent assignment explaining the
// messages: q(theta_0|c) q(x_0|theta_0) prod_i q(theta_i|hist,c) q(x_i|theta_i).
// Excludes the context prior.
double path_prob(const cotlab::ModelSpec& spec, int c,
                 const std::vector<int>& intentions,
                 const std::vector<int>& messages);

// Sum of path_prob over every intention sequence (full cartesian
// enumeration). A trailing stop symbol is covered by sequences whose last
// intention is the terminal one; interior stop symbols make the event
// impossible.
double prefix_prob(const cotlab::ModelSpec& spec,
                   const std::vector<int>& messages, int c);

double marginal_prob(const cotlab::ModelSpec& spec,
                     const std::vector<int>& messages);

// Joint posterior over (context, intention sequence): map from explanation
// to probability, plus the evidence.
std::map<std::pair<int, std::vector<int>>, double> posterior(
    const cotlab::ModelSpec& spec, const std::vector<int>& messages,
    double* evidence);

// Mixture over contexts of the per-context product of example likelihoods
// and the trailing-prefix likelihood.
double prompt_marginal(const cotlab::ModelSpec& spec,
                       const std::vector<std::vector<int>>& examples,
                       const std::vector<int>& trailing);

// The same quantity for exactly two chains, evaluated by enumerating the
// joint latent space of both chains at once (no factorization assumed).
double prompt_marginal_two_chains_joint(const cotlab::ModelSpec& spec,
                                        const std::vector<int>& first,
                                        const std::vector<int>& second);

double chain_ambiguity(const cotlab::ModelSpec& spec,
                       const cotlab::LabeledChain& chain);

}  // namespace oracle
