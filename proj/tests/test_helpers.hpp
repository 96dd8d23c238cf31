#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cotlab/model.hpp"

namespace testhelp {

inline bool near(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

// Messages / intentions by id, so tests read like the fixture definitions.
inline std::vector<int> msgs(const cotlab::ModelSpec& spec,
                             const std::vector<std::string>& ids) {
  std::vector<int> out;
  for (const auto& id : ids) out.push_back(spec.message_index(id));
  return out;
}

inline std::vector<int> thetas(const cotlab::ModelSpec& spec,
                               const std::vector<std::string>& ids) {
  std::vector<int> out;
  for (const auto& id : ids) out.push_back(spec.intention_index(id));
  return out;
}

inline cotlab::LabeledChain chain(const cotlab::ModelSpec& spec,
                                  const std::string& context,
                                  const std::vector<std::string>& message_ids,
                                  const std::vector<std::string>& intention_ids,
                                  bool complete) {
  cotlab::LabeledChain out;
  out.context = spec.context_index(context);
  out.messages = msgs(spec, message_ids);
  out.intentions = thetas(spec, intention_ids);
  out.complete = complete;
  return out;
}

// Feasible random-model parameters drawn from the acceptance ranges:
// |C| in 2..4, |Theta| in 3..5, |M| in 4..6, alpha in {0, 0.1, ..., 0.9}.
inline cotlab::RandomModelParams random_params(cotlab::Rng& rng,
                                               bool allow_full = true,
                                               int max_len = 5) {
  cotlab::RandomModelParams params;
  params.ambiguity = 0.1 * static_cast<double>(rng.next_u64() % 10);
  params.n_intentions = 3 + static_cast<int>(rng.next_u64() % 3);
  const bool disjoint = params.ambiguity == 0.0;
  const int max_contexts = disjoint ? std::min(4, params.n_intentions - 1) : 4;
  params.n_contexts =
      2 + static_cast<int>(rng.next_u64() % std::max(1, max_contexts - 1));
  const int min_messages = disjoint ? std::max(4, params.n_intentions) : 4;
  params.n_messages =
      min_messages +
      static_cast<int>(rng.next_u64() % std::max(1, 7 - min_messages));
  params.family = allow_full && (rng.next_u64() % 2 == 0)
                      ? cotlab::KernelFamily::kFull
                      : cotlab::KernelFamily::kMarkov;
  params.max_len = max_len;
  return params;
}

}  // namespace testhelp
