#include "cotlab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cotlab/errors.hpp"
#include "cotlab/logspace.hpp"

namespace cotlab {

namespace {

// True when the stop symbol occurs anywhere but the final position, which
// makes "document begins with these messages" an impossible event.
bool has_interior_stop(const ModelSpec& spec, std::span<const int> messages) {
  for (std::size_t i = 0; i + 1 < messages.size(); ++i) {
    if (messages[i] == spec.stop_symbol) return true;
  }
  return false;
}

const std::vector<double>& require_row(const ModelSpec& spec, int c,
                                       const std::string& key) {
  const std::vector<double>* row = spec.transition_row(c, key);
  if (row == nullptr) {
    throw Error("missing transition row (" + spec.contexts[c] + ", '" + key +
                "'); run validate_model");
  }
  return *row;
}

struct PrefixShape {
  bool complete = false;
  std::size_t n_content = 0;  // messages before the stop symbol
};

// Returns the shape of the conditioning event, or nullopt-like "impossible"
// via the bool.
bool prefix_shape(const ModelSpec& spec, std::span<const int> messages,
                  PrefixShape* shape) {
  if (messages.empty()) {
    shape->complete = false;
    shape->n_content = 0;
    return true;
  }
  if (has_interior_stop(spec, messages)) return false;
  shape->complete = messages.back() == spec.stop_symbol;
  shape->n_content = messages.size() - (shape->complete ? 1 : 0);
  if (shape->complete && shape->n_content == 0) return false;  // lone stop
  return true;
}

double prefix_log_prob_markov(const ModelSpec& spec,
                              std::span<const int> messages, int c,
                              const PrefixShape& shape) {
  const int n_t = spec.n_intentions();
  const int end = spec.terminal_intention;

  std::vector<double> fwd(n_t), next(n_t);
  for (int t = 0; t < n_t; ++t) {
    fwd[t] = spec.init_intention[c][t] * spec.emission[t][messages[0]];
  }

  double log_scale = 0.0;
  std::string key;
  auto rescale = [&](std::vector<double>& v) {
    double sum = 0.0;
    for (double p : v) sum += p;
    if (sum == 0.0) return false;
    log_scale += std::log(sum);
    for (double& p : v) p /= sum;
    return true;
  };
  if (!rescale(fwd)) return kNegInf;

  for (std::size_t i = 1; i < shape.n_content; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int t = 0; t < n_t; ++t) {
      if (fwd[t] == 0.0) continue;
      key.clear();
      ModelSpec::append_history_key(key, spec, t, messages[i - 1]);
      const std::vector<double>& row = require_row(spec, c, key);
      for (int u = 0; u < n_t; ++u) {
        double p = row[u] * spec.emission[u][messages[i]];
        if (p > 0.0) next[u] += fwd[t] * p;
      }
    }
    fwd.swap(next);
    if (!rescale(fwd)) return kNegInf;
  }

  if (shape.complete) {
    double mass = 0.0;
    for (int t = 0; t < n_t; ++t) {
      if (fwd[t] == 0.0) continue;
      key.clear();
      ModelSpec::append_history_key(key, spec, t, messages[shape.n_content - 1]);
      mass += fwd[t] * require_row(spec, c, key)[end] *
              spec.emission[end][spec.stop_symbol];
    }
    if (mass == 0.0) return kNegInf;
    log_scale += std::log(mass);
  }
  return log_scale;
}

// Sum over all intention sequences with positive probability. The recursion
// only follows branches whose running product is positive, so its size is
// the support, not |Theta|^length.
class EnumWalker {
 public:
  EnumWalker(const ModelSpec& spec, std::span<const int> messages, int c,
             const PrefixShape& shape)
      : spec_(spec), messages_(messages), c_(c), shape_(shape) {}

  // visit(intentions, log_prob) is called once per complete assignment.
  template <typename Visitor>
  void walk(Visitor&& visit) {
    path_.clear();
    descend(0, std::string(), 0.0, visit);
  }

 private:
  template <typename Visitor>
  void descend(std::size_t pos, const std::string& key, double log_p,
               Visitor&& visit) {
    if (pos == shape_.n_content) {
      if (!shape_.complete) {
        visit(path_, log_p);
        return;
      }
      double p = require_row(spec_, c_, key)[spec_.terminal_intention] *
                 spec_.emission[spec_.terminal_intention][spec_.stop_symbol];
      if (p > 0.0) {
        path_.push_back(spec_.terminal_intention);
        visit(path_, log_p + std::log(p));
        path_.pop_back();
      }
      return;
    }
    const std::vector<double>* row = nullptr;
    if (pos > 0) row = &require_row(spec_, c_, key);
    for (int t = 0; t < spec_.n_intentions(); ++t) {
      double select = pos == 0 ? spec_.init_intention[c_][t] : (*row)[t];
      double p = select * spec_.emission[t][messages_[pos]];
      if (p <= 0.0) continue;
      std::string child_key =
          spec_.transitions.family == KernelFamily::kMarkov ? std::string() : key;
      ModelSpec::append_history_key(child_key, spec_, t, messages_[pos]);
      path_.push_back(t);
      descend(pos + 1, child_key, log_p + std::log(p), visit);
      path_.pop_back();
    }
  }

  const ModelSpec& spec_;
  std::span<const int> messages_;
  int c_;
  const PrefixShape& shape_;
  std::vector<int> path_;
};

}  // namespace

double joint_prob(const ModelSpec& spec, const LabeledChain& chain) {
  if (chain.messages.size() != chain.intentions.size()) {
    throw std::invalid_argument("chain has mismatched message/intention lengths");
  }
  if (chain.context < 0 || chain.context >= spec.n_contexts()) {
    throw std::invalid_argument("chain context index out of range");
  }
  if (chain.messages.empty()) return spec.context_prior[chain.context];

  const int c = chain.context;
  double p = spec.context_prior[c];
  p *= spec.init_intention[c][chain.intentions[0]];
  p *= spec.emission[chain.intentions[0]][chain.messages[0]];
  if (p == 0.0) return 0.0;

  std::string key;
  for (std::size_t i = 1; i < chain.messages.size(); ++i) {
    if (spec.transitions.family == KernelFamily::kMarkov) key.clear();
    ModelSpec::append_history_key(key, spec, chain.intentions[i - 1],
                                  chain.messages[i - 1]);
    p *= require_row(spec, c, key)[chain.intentions[i]];
    p *= spec.emission[chain.intentions[i]][chain.messages[i]];
    if (p == 0.0) return 0.0;
  }
  return p;
}

double prefix_log_prob_given_context_enum(const ModelSpec& spec,
                                          std::span<const int> messages,
                                          int c) {
  PrefixShape shape;
  if (!prefix_shape(spec, messages, &shape)) return kNegInf;
  if (messages.empty()) return 0.0;
  LogSumAcc acc;
  EnumWalker walker(spec, messages, c, shape);
  walker.walk([&acc](const std::vector<int>&, double lp) { acc.add(lp); });
  return acc.log_total();
}

double prefix_log_prob_given_context(const ModelSpec& spec,
                                     std::span<const int> messages, int c) {
  if (spec.transitions.family == KernelFamily::kFull) {
    return prefix_log_prob_given_context_enum(spec, messages, c);
  }
  PrefixShape shape;
  if (!prefix_shape(spec, messages, &shape)) return kNegInf;
  if (messages.empty()) return 0.0;
  return prefix_log_prob_markov(spec, messages, c, shape);
}

double prefix_prob_given_context(const ModelSpec& spec,
                                 std::span<const int> messages, int c) {
  return to_linear(prefix_log_prob_given_context(spec, messages, c));
}

double prompt_log_marginal(const ModelSpec& spec,
                           std::span<const std::vector<int>> examples,
                           std::span<const int> trailing) {
  LogSumAcc acc;
  for (int c = 0; c < spec.n_contexts(); ++c) {
    if (spec.context_prior[c] <= 0.0) continue;
    double lp = std::log(spec.context_prior[c]);
    for (const auto& example : examples) {
      lp += prefix_log_prob_given_context(spec, example, c);
      if (lp == kNegInf) break;
    }
    if (lp != kNegInf) lp += prefix_log_prob_given_context(spec, trailing, c);
    acc.add(lp);
  }
  return acc.log_total();
}

double prompt_marginal(const ModelSpec& spec,
                       std::span<const std::vector<int>> examples,
                       std::span<const int> trailing) {
  return to_linear(prompt_log_marginal(spec, examples, trailing));
}

double marginal_log_prob(const ModelSpec& spec,
                         std::span<const int> messages) {
  return prompt_log_marginal(spec, {}, messages);
}

double marginal_prob(const ModelSpec& spec, std::span<const int> messages) {
  return to_linear(marginal_log_prob(spec, messages));
}

double PosteriorResult::probability_of(const LatentExplanation& truth) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), truth,
      [](const auto& entry, const LatentExplanation& key) {
        return entry.first < key;
      });
  if (it == entries.end() || !(it->first == truth)) return 0.0;
  return it->second;
}

PosteriorResult posterior_latents(const ModelSpec& spec,
                                  std::span<const int> messages) {
  if (messages.empty()) {
    throw std::invalid_argument("posterior_latents: empty message sequence");
  }
  PrefixShape shape;
  std::vector<std::pair<LatentExplanation, double>> raw;  // log joints
  if (prefix_shape(spec, messages, &shape)) {
    for (int c = 0; c < spec.n_contexts(); ++c) {
      if (spec.context_prior[c] <= 0.0) continue;
      double log_prior = std::log(spec.context_prior[c]);
      EnumWalker walker(spec, messages, c, shape);
      walker.walk([&raw, c, log_prior](const std::vector<int>& path, double lp) {
        raw.push_back({LatentExplanation{c, path}, log_prior + lp});
      });
    }
  }
  if (raw.empty()) {
    throw ConditioningOnNullEvent(
        "posterior conditioned on a zero-probability message sequence");
  }

  LogSumAcc acc;
  for (const auto& [key, lp] : raw) acc.add(lp);
  const double log_evidence = acc.log_total();

  PosteriorResult result;
  result.log_evidence = log_evidence;
  result.evidence = to_linear(log_evidence);
  result.entries.reserve(raw.size());
  for (auto& [key, lp] : raw) {
    result.entries.push_back({std::move(key), std::exp(lp - log_evidence)});
  }
  std::sort(result.entries.begin(), result.entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return result;
}

std::vector<int> concat(std::span<const int> input, std::span<const int> tail) {
  std::vector<int> out;
  out.reserve(input.size() + tail.size());
  out.insert(out.end(), input.begin(), input.end());
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

double p_llm_conditional(const ModelSpec& spec, std::span<const int> tail,
                         std::span<const int> input,
                         std::span<const std::vector<int>> examples) {
  const double den = prompt_log_marginal(spec, examples, input);
  if (den == kNegInf) {
    throw ConditioningOnNullEvent("p_llm_conditional: prompt has probability zero");
  }
  if (tail.empty()) return 1.0;
  const std::vector<int> full = concat(input, tail);
  return std::exp(prompt_log_marginal(spec, examples, full) - den);
}

double q_true_conditional(const ModelSpec& spec, std::span<const int> tail,
                          std::span<const int> input, int c) {
  const double den = prefix_log_prob_given_context(spec, input, c);
  if (den == kNegInf) {
    throw ConditioningOnNullEvent(
        "q_true_conditional: input has probability zero under this context");
  }
  if (tail.empty()) return 1.0;
  const std::vector<int> full = concat(input, tail);
  return std::exp(prefix_log_prob_given_context(spec, full, c) - den);
}

std::vector<std::vector<int>> enumerate_tails(const ModelSpec& spec,
                                              int max_len) {
  if (max_len < 1) throw std::invalid_argument("enumerate_tails: max_len < 1");
  std::vector<std::vector<int>> tails;
  std::vector<int> current;
  auto extend = [&](auto&& self, int len) -> void {
    if (static_cast<int>(current.size()) == len) {
      tails.push_back(current);
      return;
    }
    const bool last_position = static_cast<int>(current.size()) == len - 1;
    for (int m = 0; m < spec.n_messages(); ++m) {
      if (m == spec.stop_symbol && !last_position) continue;
      current.push_back(m);
      self(self, len);
      current.pop_back();
    }
  };
  for (int len = 1; len <= max_len; ++len) extend(extend, len);
  return tails;
}

}  // namespace cotlab
