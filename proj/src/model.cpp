#include "cotlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cotlab/errors.hpp"

namespace cotlab {

namespace {

constexpr double kSumTol = 1e-12;

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char ch : id) {
    if (ch == ':' || ch == '|' || ch == ',' || ch == '"' ||
        static_cast<unsigned char>(ch) < 0x20) {
      return false;
    }
  }
  return true;
}

int find_id(const std::vector<std::string>& ids, std::string_view id) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return static_cast<int>(i);
  }
  return -1;
}

bool is_probability_vector(std::span<const double> v, std::string* why) {
  double sum = 0.0;
  for (double p : v) {
    if (!(p >= 0.0)) {
      *why = "negative entry " + std::to_string(p);
      return false;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    *why = "sum = " + std::to_string(sum) + ", expected 1";
    return false;
  }
  return true;
}

// Splits "t0:a|t1:b" into (intention, message) id pairs. Returns false on
// malformed keys.
bool decode_history_key(const std::string& key,
                        std::vector<std::pair<std::string, std::string>>* out) {
  out->clear();
  std::size_t start = 0;
  while (start <= key.size()) {
    std::size_t bar = key.find('|', start);
    std::size_t end = bar == std::string::npos ? key.size() : bar;
    std::size_t colon = key.find(':', start);
    if (colon == std::string::npos || colon >= end) return false;
    out->emplace_back(key.substr(start, colon - start),
                      key.substr(colon + 1, end - colon - 1));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return !out->empty();
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  return family == KernelFamily::kMarkov ? "MARKOV" : "FULL";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "MARKOV") return KernelFamily::kMarkov;
  if (name == "FULL") return KernelFamily::kFull;
  throw std::invalid_argument("unknown kernel family: " + std::string(name));
}

int ModelSpec::context_index(std::string_view id) const {
  return find_id(contexts, id);
}
int ModelSpec::intention_index(std::string_view id) const {
  return find_id(intentions, id);
}
int ModelSpec::message_index(std::string_view id) const {
  return find_id(messages, id);
}

void ModelSpec::append_history_key(std::string& key, const ModelSpec& spec,
                                   int intention, int message) {
  if (!key.empty()) key += '|';
  key += spec.intentions[intention];
  key += ':';
  key += spec.messages[message];
}

std::string ModelSpec::history_key(
    std::span<const std::pair<int, int>> history) const {
  std::string key;
  for (const auto& [intention, message] : history) {
    append_history_key(key, *this, intention, message);
  }
  return key;
}

const std::vector<double>* ModelSpec::transition_row(
    int context, const std::string& key) const {
  const auto& row_map = transitions.rows[context];
  if (transitions.family == KernelFamily::kMarkov) {
    // Markov keys carry only the last pair; the caller passes it directly.
    auto it = row_map.find(key);
    return it == row_map.end() ? nullptr : &it->second;
  }
  auto it = row_map.find(key);
  if (it != row_map.end()) return &it->second;
  return &transitions.fallback[context];
}

ValidationReport validate_model(const ModelSpec& spec) {
  ValidationReport report;
  auto flag = [&report](std::string msg) {
    report.violations.push_back(std::move(msg));
  };

  if (spec.contexts.empty()) flag("contexts: need at least 1");
  if (spec.intentions.size() < 2) {
    flag("intentions: need at least 2 (including the terminal intention)");
  }
  if (spec.messages.size() < 2) {
    flag("messages: need at least 2 (including the stop symbol)");
  }
  for (const auto& [name, ids] :
       {std::pair{"contexts", &spec.contexts},
        std::pair{"intentions", &spec.intentions},
        std::pair{"messages", &spec.messages}}) {
    for (const auto& id : *ids) {
      if (!valid_id(id)) flag(std::string(name) + ": bad identifier '" + id + "'");
    }
    for (std::size_t i = 0; i < ids->size(); ++i) {
      for (std::size_t j = i + 1; j < ids->size(); ++j) {
        if ((*ids)[i] == (*ids)[j]) {
          flag(std::string(name) + ": duplicate identifier '" + (*ids)[i] + "'");
        }
      }
    }
  }
  if (spec.terminal_intention < 0 ||
      spec.terminal_intention >= spec.n_intentions()) {
    flag("terminal_intention: index out of range");
  }
  if (spec.stop_symbol < 0 || spec.stop_symbol >= spec.n_messages()) {
    flag("stop_symbol: index out of range");
  }
  if (spec.max_len < 2) flag("max_len: must be at least 2");
  if (!(spec.end_floor > 0.0) || spec.end_floor >= 1.0) {
    flag("end_floor: must be in (0, 1)");
  }
  if (!report.ok()) return report;  // shape errors make the rest unreadable

  const int end = spec.terminal_intention;
  const int stop = spec.stop_symbol;

  std::string why;
  if (spec.context_prior.size() != spec.contexts.size()) {
    flag("context_prior: wrong length");
  } else if (!is_probability_vector(spec.context_prior, &why)) {
    flag("context_prior: " + why);
  }

  if (spec.init_intention.size() != spec.contexts.size()) {
    flag("init_intention: wrong number of rows");
  } else {
    for (int c = 0; c < spec.n_contexts(); ++c) {
      const auto& row = spec.init_intention[c];
      if (static_cast<int>(row.size()) != spec.n_intentions()) {
        flag("init_intention row '" + spec.contexts[c] + "': wrong length");
        continue;
      }
      if (!is_probability_vector(row, &why)) {
        flag("init_intention row '" + spec.contexts[c] + "': " + why);
      }
      if (row[end] != 0.0) {
        flag("init_intention row '" + spec.contexts[c] +
             "': assigns mass to the terminal intention");
      }
    }
  }

  if (spec.emission.size() != spec.intentions.size()) {
    flag("emission: wrong number of rows");
  } else {
    for (int t = 0; t < spec.n_intentions(); ++t) {
      const auto& row = spec.emission[t];
      if (static_cast<int>(row.size()) != spec.n_messages()) {
        flag("emission row '" + spec.intentions[t] + "': wrong length");
        continue;
      }
      if (!is_probability_vector(row, &why)) {
        flag("emission row '" + spec.intentions[t] + "': " + why);
      }
      if (t == end) {
        if (std::abs(row[stop] - 1.0) > kSumTol) {
          flag("emission row '" + spec.intentions[t] +
               "': terminal intention must emit the stop symbol with mass 1");
        }
      } else if (row[stop] != 0.0) {
        flag("emission row '" + spec.intentions[t] +
             "': non-terminal intention emits the stop symbol");
      }
    }
  }

  const auto& kernel = spec.transitions;
  if (kernel.rows.size() != spec.contexts.size()) {
    flag("transition_kernel: wrong number of per-context row maps");
    return report;
  }
  if (kernel.family == KernelFamily::kFull &&
      kernel.fallback.size() != spec.contexts.size()) {
    flag("transition_kernel: FULL family requires a fallback row per context");
    return report;
  }

  auto check_row = [&](const std::string& label, const std::vector<double>& row) {
    if (static_cast<int>(row.size()) != spec.n_intentions()) {
      flag(label + ": wrong length");
      return;
    }
    if (!is_probability_vector(row, &why)) flag(label + ": " + why);
    if (row[end] + kSumTol < spec.end_floor) {
      flag(label + ": mass on terminal intention " + std::to_string(row[end]) +
           " is below end_floor " + std::to_string(spec.end_floor));
    }
  };

  std::vector<std::pair<std::string, std::string>> decoded;
  for (int c = 0; c < spec.n_contexts(); ++c) {
    for (const auto& [key, row] : kernel.rows[c]) {
      std::string label =
          "transition row (" + spec.contexts[c] + ", '" + key + "')";
      if (!decode_history_key(key, &decoded)) {
        flag(label + ": malformed history key");
        continue;
      }
      if (kernel.family == KernelFamily::kMarkov && decoded.size() != 1) {
        flag(label + ": MARKOV keys must be a single intention:message pair");
      }
      if (static_cast<int>(decoded.size()) > spec.max_len - 1) {
        flag(label + ": history longer than max_len allows");
      }
      bool pairs_ok = true;
      for (const auto& [t_id, m_id] : decoded) {
        if (spec.intention_index(t_id) < 0 || spec.message_index(m_id) < 0) {
          flag(label + ": unknown identifier in history");
          pairs_ok = false;
        }
      }
      if (pairs_ok && spec.intention_index(decoded.back().first) == end) {
        flag(label + ": terminal intention used as a transition source");
      }
      check_row(label, row);
    }
    if (kernel.family == KernelFamily::kFull) {
      check_row("transition fallback row (" + spec.contexts[c] + ")", kernel.fallback[c]);
    }
  }

  // Reachable Markov pairs need a row: sampling and inference both look up
  // (theta, x) whenever emission[theta][x] > 0.
  if (kernel.family == KernelFamily::kMarkov &&
      spec.emission.size() == spec.intentions.size()) {
    for (int c = 0; c < spec.n_contexts(); ++c) {
      for (int t = 0; t < spec.n_intentions(); ++t) {
        if (t == end) continue;
        for (int m = 0; m < spec.n_messages(); ++m) {
          if (m == stop || spec.emission[t][m] <= 0.0) continue;
          std::string key;
          ModelSpec::append_history_key(key, spec, t, m);
          if (kernel.rows[c].find(key) == kernel.rows[c].end()) {
            flag("transition_kernel (" + spec.contexts[c] + "): missing row '" +
                 key + "' for a reachable pair");
          }
        }
      }
    }
  }

  return report;
}

namespace {

int draw_from_row(Rng& rng, std::span<const double> row) {
  return rng.next_categorical(row);
}

}  // namespace

LabeledChain sample_chain(const ModelSpec& spec, int context, Rng& rng) {
  LabeledChain chain;
  chain.context = context;

  int intention = draw_from_row(rng, spec.init_intention[context]);
  int message = draw_from_row(rng, spec.emission[intention]);
  chain.intentions.push_back(intention);
  chain.messages.push_back(message);

  std::string key;
  while (message != spec.stop_symbol) {
    if (static_cast<int>(chain.messages.size()) >= spec.max_len) {
      throw TruncationError("chain did not reach the stop symbol within " +
                            std::to_string(spec.max_len) + " messages");
    }
    if (spec.transitions.family == KernelFamily::kMarkov) {
      key.clear();
    }
    ModelSpec::append_history_key(key, spec, intention, message);
    const std::vector<double>* row = spec.transition_row(context, key);
    if (row == nullptr) {
      throw Error("missing transition row for key '" + key + "'");
    }
    intention = draw_from_row(rng, *row);
    message = draw_from_row(rng, spec.emission[intention]);
    chain.intentions.push_back(intention);
    chain.messages.push_back(message);
  }
  chain.complete = true;
  return chain;
}

LabeledChain sample_chain(const ModelSpec& spec, int context,
                          std::uint64_t seed) {
  Rng rng(seed);
  return sample_chain(spec, context, rng);
}

LabeledChain sample_input_prefix(const ModelSpec& spec, int context, Rng& rng) {
  LabeledChain prefix;
  prefix.context = context;
  int intention = draw_from_row(rng, spec.init_intention[context]);
  prefix.intentions.push_back(intention);
  prefix.messages.push_back(draw_from_row(rng, spec.emission[intention]));
  prefix.complete = false;
  return prefix;
}

PromptInstance sample_prompt_instance_for_context(const ModelSpec& spec,
                                                  int context, int n_examples,
                                                  std::uint64_t seed) {
  Rng base(seed);
  PromptInstance instance;
  instance.true_context = context;
  instance.examples.reserve(n_examples);
  for (int k = 0; k < n_examples; ++k) {
    Rng stream = base.substream(static_cast<std::uint64_t>(k) + 1);
    instance.examples.push_back(sample_chain(spec, context, stream));
  }
  Rng input_stream = base.substream(static_cast<std::uint64_t>(n_examples) + 1);
  instance.input = sample_input_prefix(spec, context, input_stream);
  return instance;
}

PromptInstance sample_prompt_instance(const ModelSpec& spec, int n_examples,
                                      std::uint64_t seed) {
  Rng base(seed);
  Rng context_stream = base.substream(0);
  int context = context_stream.next_categorical(spec.context_prior);
  return sample_prompt_instance_for_context(spec, context, n_examples, seed);
}

namespace {

// TINY fixtures share one skeleton: two contexts, two content intentions,
// two content messages, Markov kernel that keeps the context's intention or
// stops with probability 1/2.
ModelSpec tiny_skeleton(double a_given_t0, double b_given_t1) {
  ModelSpec spec;
  spec.contexts = {"c0", "c1"};
  spec.intentions = {"t0", "t1", "END"};
  spec.messages = {"a", "b", "<END>"};
  spec.terminal_intention = 2;
  spec.stop_symbol = 2;
  spec.context_prior = {0.5, 0.5};
  spec.init_intention = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  spec.emission = {{a_given_t0, 1.0 - a_given_t0, 0.0},
                   {1.0 - b_given_t1, b_given_t1, 0.0},
                   {0.0, 0.0, 1.0}};
  spec.transitions.family = KernelFamily::kMarkov;
  spec.transitions.rows.resize(2);
  const std::vector<double> keep_t0 = {0.5, 0.0, 0.5};
  const std::vector<double> keep_t1 = {0.0, 0.5, 0.5};
  for (int t = 0; t < 2; ++t) {
    for (int m = 0; m < 2; ++m) {
      std::string key;
      ModelSpec::append_history_key(key, spec, t, m);
      spec.transitions.rows[0][key] = keep_t0;
      spec.transitions.rows[1][key] = keep_t1;
    }
  }
  spec.max_len = 32;
  spec.end_floor = 0.05;
  return spec;
}

}  // namespace

ModelSpec make_fixture(std::string_view name) {
  if (name == "TINY-A") return tiny_skeleton(1.0, 1.0);
  if (name == "TINY-B") return tiny_skeleton(0.8, 0.8);
  if (name == "SINGLE-C") {
    ModelSpec spec = tiny_skeleton(0.8, 0.8);
    spec.contexts = {"c0"};
    spec.context_prior = {1.0};
    spec.init_intention.resize(1);
    spec.transitions.rows.resize(1);
    return spec;
  }
  if (name == "SKEWED") {
    ModelSpec spec = tiny_skeleton(0.8, 0.8);
    spec.context_prior = {0.75, 0.25};
    return spec;
  }
  throw std::invalid_argument("unknown fixture: " + std::string(name));
}

namespace {

// Flat Dirichlet draw over the index set `support`, written into a vector of
// length `size` (zero elsewhere).
std::vector<double> simplex_draw(Rng& rng, int size,
                                 std::span<const int> support) {
  std::vector<double> row(size, 0.0);
  double total = 0.0;
  for (int i : support) {
    double u = rng.next_unit();
    // next_unit() can return 0; nudge into (0, 1].
    double e = -std::log(1.0 - u);
    row[i] = e;
    total += e;
  }
  for (int i : support) row[i] /= total;
  return row;
}

// Mixes an end_floor point mass on the terminal intention into a row.
void apply_end_floor(std::vector<double>& row, int end, double floor) {
  for (double& p : row) p *= 1.0 - floor;
  row[end] += floor;
}

}  // namespace

ModelSpec generate_random_model(const RandomModelParams& params,
                                std::uint64_t seed) {
  const int n_c = params.n_contexts;
  const int n_t = params.n_intentions;
  const int n_m = params.n_messages;
  if (n_c < 1 || n_t < 2 || n_m < 2) {
    throw std::invalid_argument("infeasible sizes: need |C| >= 1, |Theta| >= 2, |M| >= 2");
  }
  const int content_t = n_t - 1;
  const int content_m = n_m - 1;
  const bool disjoint = params.ambiguity == 0.0;
  if (disjoint && content_m < content_t) {
    throw std::invalid_argument(
        "infeasible sizes: ambiguity 0 needs |M| >= |Theta| for disjoint emission blocks");
  }
  if (disjoint && content_t < n_c) {
    throw std::invalid_argument(
        "infeasible sizes: ambiguity 0 needs |Theta| - 1 >= |C| for disjoint context blocks");
  }
  if (!(params.ambiguity >= 0.0 && params.ambiguity <= 1.0)) {
    throw std::invalid_argument("ambiguity must lie in [0, 1]");
  }

  ModelSpec spec;
  for (int c = 0; c < n_c; ++c) spec.contexts.push_back("c" + std::to_string(c));
  for (int t = 0; t < content_t; ++t) {
    spec.intentions.push_back("t" + std::to_string(t));
  }
  spec.intentions.push_back("END");
  for (int m = 0; m < content_m; ++m) {
    spec.messages.push_back("m" + std::to_string(m));
  }
  spec.messages.push_back("<END>");
  spec.terminal_intention = content_t;
  spec.stop_symbol = content_m;
  spec.max_len = params.max_len;
  spec.end_floor = params.end_floor;

  const int end = spec.terminal_intention;
  const int stop = spec.stop_symbol;

  // Emission blocks: message m belongs to intention m % content_t.
  std::vector<std::vector<int>> block(content_t);
  for (int m = 0; m < content_m; ++m) block[m % content_t].push_back(m);

  const double alpha = params.ambiguity;
  spec.emission.assign(n_t, std::vector<double>(n_m, 0.0));
  for (int t = 0; t < content_t; ++t) {
    // Intentions whose block is empty (more intentions than messages) fall
    // back to a uniform row over content messages.
    const std::vector<int>* own = &block[t];
    std::vector<int> all_content;
    if (own->empty()) {
      for (int m = 0; m < content_m; ++m) all_content.push_back(m);
      own = &all_content;
    }
    for (int m : *own) {
      spec.emission[t][m] += (1.0 - alpha) / static_cast<double>(own->size());
    }
    for (int m = 0; m < content_m; ++m) {
      spec.emission[t][m] += alpha / static_cast<double>(content_m);
    }
  }
  spec.emission[end][stop] = 1.0;

  // Context blocks: with the dial at 0, context c owns intentions
  // {t : t % n_c == c} so latent explanations never cross contexts.
  std::vector<std::vector<int>> context_intentions(n_c);
  for (int t = 0; t < content_t; ++t) {
    if (disjoint) {
      context_intentions[t % n_c].push_back(t);
    } else {
      for (int c = 0; c < n_c; ++c) context_intentions[c].push_back(t);
    }
  }

  Rng rng(seed);
  {
    std::vector<int> all_contexts(n_c);
    for (int c = 0; c < n_c; ++c) all_contexts[c] = c;
    spec.context_prior = simplex_draw(rng, n_c, all_contexts);
  }

  spec.init_intention.resize(n_c);
  for (int c = 0; c < n_c; ++c) {
    spec.init_intention[c] = simplex_draw(rng, n_t, context_intentions[c]);
  }

  auto draw_transition_row = [&](int c) {
    std::vector<int> support = context_intentions[c];
    support.push_back(end);
    std::vector<double> row = simplex_draw(rng, n_t, support);
    apply_end_floor(row, end, params.end_floor);
    return row;
  };

  // Keys are generated for every emission-positive (intention, message)
  // pair, in index order so the table is deterministic given the seed.
  std::vector<std::string> depth1_keys;
  for (int t = 0; t < content_t; ++t) {
    for (int m = 0; m < content_m; ++m) {
      if (spec.emission[t][m] <= 0.0) continue;
      std::string key;
      ModelSpec::append_history_key(key, spec, t, m);
      depth1_keys.push_back(std::move(key));
    }
  }

  spec.transitions.family = params.family;
  spec.transitions.rows.resize(n_c);
  if (params.family == KernelFamily::kMarkov) {
    for (int c = 0; c < n_c; ++c) {
      for (const auto& key : depth1_keys) {
        spec.transitions.rows[c][key] = draw_transition_row(c);
      }
    }
  } else {
    spec.transitions.fallback.resize(n_c);
    for (int c = 0; c < n_c; ++c) {
      for (const auto& first : depth1_keys) {
        spec.transitions.rows[c][first] = draw_transition_row(c);
        for (const auto& second : depth1_keys) {
          spec.transitions.rows[c][first + "|" + second] = draw_transition_row(c);
        }
      }
      spec.transitions.fallback[c] = draw_transition_row(c);
    }
  }

  return spec;
}

}  // namespace cotlab
