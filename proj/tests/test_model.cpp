#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "cotlab/errors.hpp"
#include "cotlab/inference.hpp"
#include "cotlab/model.hpp"
#include "oracle.hpp"
#include "test_helpers.hpp"

using namespace cotlab;
using testhelp::near;

TEST_CASE("fixtures validate and match their definitions") {
  for (const char* name : {"TINY-A", "TINY-B", "SINGLE-C", "SKEWED"}) {
    ModelSpec spec = make_fixture(name);
    ValidationReport report = validate_model(spec);
    CAPTURE(name);
    for (const auto& v : report.violations) MESSAGE(v);
    CHECK(report.ok());
  }

  ModelSpec single = make_fixture("SINGLE-C");
  CHECK(single.n_contexts() == 1);

  ModelSpec skewed = make_fixture("SKEWED");
  double sum = 0.0;
  for (double q : skewed.context_prior) sum += q;
  CHECK(near(sum, 1.0, 1e-15));
  CHECK(skewed.context_prior[0] == 0.75);

  CHECK_THROWS_AS(make_fixture("TINY-Z"), std::invalid_argument);
}

TEST_CASE("validate_model reports specific violations") {
  ModelSpec spec = make_fixture("TINY-A");
  SUBCASE("emission row that does not sum to 1") {
    spec.emission[0] = {0.5, 0.6, 0.0};
    ValidationReport report = validate_model(spec);
    REQUIRE_FALSE(report.ok());
    bool mentions_sum = false;
    for (const auto& v : report.violations) {
      if (v.find("t0") != std::string::npos && v.find("sum") != std::string::npos) {
        mentions_sum = true;
      }
    }
    CHECK(mentions_sum);
  }
  SUBCASE("non-terminal intention emitting the stop symbol") {
    spec.emission[0] = {0.8, 0.1, 0.1};
    ValidationReport report = validate_model(spec);
    REQUIRE_FALSE(report.ok());
    bool mentions_stop = false;
    for (const auto& v : report.violations) {
      if (v.find("stop symbol") != std::string::npos) mentions_stop = true;
    }
    CHECK(mentions_stop);
  }
  SUBCASE("initial intention selecting the terminal intention") {
    spec.init_intention[0] = {0.9, 0.0, 0.1};
    CHECK_FALSE(validate_model(spec).ok());
  }
  SUBCASE("transition row below the end floor") {
    for (auto& [key, row] : spec.transitions.rows[0]) row = {0.99, 0.0, 0.01};
    CHECK_FALSE(validate_model(spec).ok());
  }
  SUBCASE("missing Markov row for a reachable pair") {
    spec.transitions.rows[0].erase("t0:a");
    CHECK_FALSE(validate_model(spec).ok());
  }
}

TEST_CASE("sample_chain follows the generative process on TINY-A") {
  ModelSpec spec = make_fixture("TINY-A");
  const int c0 = spec.context_index("c0");
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    LabeledChain chain = sample_chain(spec, c0, seed);
    CHECK(chain.complete);
    CHECK(chain.messages.back() == spec.stop_symbol);
    CHECK(chain.intentions.back() == spec.terminal_intention);
    for (std::size_t i = 0; i + 1 < chain.messages.size(); ++i) {
      CHECK(chain.messages[i] == spec.message_index("a"));
      CHECK(chain.intentions[i] == spec.intention_index("t0"));
    }
    CHECK(joint_prob(spec, chain) > 0.0);
  }
}

TEST_CASE("TINY-A content length is geometric with mean 2") {
  ModelSpec spec = make_fixture("TINY-A");
  double total = 0.0;
  const int runs = 100000;
  for (int s = 0; s < runs; ++s) {
    LabeledChain chain = sample_chain(spec, 0, static_cast<std::uint64_t>(s));
    total += static_cast<double>(chain.messages.size() - 1);
  }
  CHECK(near(total / runs, 2.0, 0.05));
}

TEST_CASE("sample_chain truncates when the floor invariant is relaxed") {
  ModelSpec spec = make_fixture("TINY-A");
  spec.max_len = 4;
  for (auto& [key, row] : spec.transitions.rows[0]) row = {1.0, 0.0, 0.0};
  bool truncated = false;
  for (std::uint64_t seed = 0; seed < 5 && !truncated; ++seed) {
    try {
      sample_chain(spec, 0, seed);
    } catch (const TruncationError&) {
      truncated = true;
    }
  }
  CHECK(truncated);
}

TEST_CASE("prompt instances share one context and are seed-deterministic") {
  ModelSpec spec = make_fixture("TINY-A");
  PromptInstance instance = sample_prompt_instance(spec, 3, 99);
  CHECK(instance.examples.size() == 3);
  for (const LabeledChain& example : instance.examples) {
    CHECK(example.context == instance.true_context);
    CHECK(example.complete);
  }
  CHECK(instance.input.context == instance.true_context);
  CHECK(instance.input.messages.size() == 1);
  CHECK_FALSE(instance.input.complete);

  PromptInstance empty = sample_prompt_instance(spec, 0, 5);
  CHECK(empty.examples.empty());
  CHECK(empty.input.messages.size() == 1);

  PromptInstance again = sample_prompt_instance(spec, 2, 1234);
  PromptInstance twice = sample_prompt_instance(spec, 2, 1234);
  CHECK(again.true_context == twice.true_context);
  REQUIRE(again.examples.size() == twice.examples.size());
  for (std::size_t k = 0; k < again.examples.size(); ++k) {
    CHECK(again.examples[k].messages == twice.examples[k].messages);
    CHECK(again.examples[k].intentions == twice.examples[k].intentions);
  }
  CHECK(again.input.messages == twice.input.messages);
}

TEST_CASE("sampling frequencies match exact chain marginals on TINY fixtures") {
  for (const char* name : {"TINY-A", "TINY-B"}) {
    ModelSpec spec = make_fixture(name);
    CAPTURE(name);
    const int runs = 40000;
    std::map<std::vector<int>, int> counts;
    Rng base(2718);
    for (int s = 0; s < runs; ++s) {
      Rng stream = base.substream(static_cast<std::uint64_t>(s));
      int c = stream.next_categorical(spec.context_prior);
      LabeledChain chain = sample_chain(spec, c, stream);
      counts[chain.messages] += 1;
    }
    // Check the most frequent complete chains against marginal_prob.
    int checked = 0;
    for (const auto& [messages, count] : counts) {
      if (count < 500) continue;
      const double p = oracle::marginal_prob(spec, messages);
      const double freq = static_cast<double>(count) / runs;
      const double band = 4.0 * std::sqrt(p * (1.0 - p) / runs);
      CAPTURE(freq);
      CAPTURE(p);
      CHECK(near(freq, p, band));
      ++checked;
    }
    CHECK(checked >= 2);
  }
}

TEST_CASE("random models: dial endpoints and feasibility") {
  SUBCASE("alpha = 0 gives disjoint emission blocks and zero chain ambiguity") {
    RandomModelParams params;
    params.n_contexts = 2;
    params.n_intentions = 4;
    params.n_messages = 6;
    params.ambiguity = 0.0;
    params.max_len = 8;
    ModelSpec spec = generate_random_model(params, 321);
    CHECK(validate_model(spec).ok());
    // Disjoint supports: each content message is emitted by one intention.
    for (int m = 0; m < spec.n_messages(); ++m) {
      if (m == spec.stop_symbol) continue;
      int emitters = 0;
      for (int t = 0; t < spec.n_intentions(); ++t) {
        if (spec.emission[t][m] > 0.0) ++emitters;
      }
      CHECK(emitters == 1);
    }
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      LabeledChain chain;
      try {
        chain = sample_chain(spec, static_cast<int>(seed % 2), seed);
      } catch (const TruncationError&) {
        continue;
      }
      CHECK(oracle::chain_ambiguity(spec, chain) == 0.0);
    }
  }
  SUBCASE("alpha = 1 makes all content emission rows identical") {
    RandomModelParams params;
    params.n_contexts = 3;
    params.n_intentions = 4;
    params.n_messages = 5;
    params.ambiguity = 1.0;
    ModelSpec spec = generate_random_model(params, 7);
    for (int t = 1; t < spec.n_intentions(); ++t) {
      if (t == spec.terminal_intention) continue;
      CHECK(spec.emission[t] == spec.emission[0]);
    }
    for (int m = 0; m < spec.n_messages(); ++m) {
      if (m == spec.stop_symbol) continue;
      CHECK(near(spec.emission[0][m], 0.25, 1e-15));
    }
  }
  SUBCASE("(3,4,6) alpha=0.3 validates, both families") {
    for (KernelFamily family : {KernelFamily::kMarkov, KernelFamily::kFull}) {
      RandomModelParams params;
      params.n_contexts = 3;
      params.n_intentions = 4;
      params.n_messages = 6;
      params.ambiguity = 0.3;
      params.family = family;
      ModelSpec spec = generate_random_model(params, 77);
      ValidationReport report = validate_model(spec);
      for (const auto& v : report.violations) MESSAGE(v);
      CHECK(report.ok());
    }
  }
  SUBCASE("infeasible sizes are rejected") {
    RandomModelParams params;
    params.n_contexts = 3;
    params.n_intentions = 3;  // only 2 content intentions for 3 contexts
    params.n_messages = 6;
    params.ambiguity = 0.0;
    CHECK_THROWS_AS(generate_random_model(params, 1), std::invalid_argument);
    params.n_contexts = 2;
    params.n_intentions = 5;
    params.n_messages = 4;  // fewer content messages than intentions
    CHECK_THROWS_AS(generate_random_model(params, 1), std::invalid_argument);
  }
}

TEST_CASE("full-family kernels really condition on depth-2 history") {
  RandomModelParams params;
  params.n_contexts = 2;
  params.n_intentions = 3;
  params.n_messages = 4;
  params.ambiguity = 0.5;
  params.family = KernelFamily::kFull;
  ModelSpec spec = generate_random_model(params, 99);
  CHECK(validate_model(spec).ok());
  // A depth-2 row exists and differs from the fallback.
  bool found_depth2 = false;
  for (const auto& [key, row] : spec.transitions.rows[0]) {
    if (key.find('|') != std::string::npos &&
        row != spec.transitions.fallback[0]) {
      found_depth2 = true;
      break;
    }
  }
  CHECK(found_depth2);
}
