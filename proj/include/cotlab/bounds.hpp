#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cotlab/model.hpp"
#include "cotlab/parallel.hpp"

namespace cotlab {

enum class PriorMode { kUniformAsserted, kGeneral };

// Ambiguity-ratio constant and right-hand side of the likelihood-gap bound
// for one prompt instance. In uniform mode the constant is
// 2 * eps0 / (1 - eps0); in general mode it carries the skewness power
// gamma^N. Infinite when some ambiguity equals 1 (the bound is vacuous).
struct TheoremRhs {
  double constant = 0.0;  // eta (uniform mode) or eta-hat (general mode)
  double rhs = 0.0;
  bool vacuous = false;
};

TheoremRhs theorem_rhs(const ModelSpec& spec, const PromptInstance& instance,
                       PriorMode mode);

// Exact cross-context ratio sums from the bound's derivation, for one tail:
//   tail_mass      sum over c != c* of q(input+tail, examples, c)
//                  divided by q(examples, input, c*)
//   prompt_mass    the same with the input alone (tail-independent)
//   input_ratio    sum over c != c* of q(input, c) / q(input, c*)
//   example_ratios per example k: sum over c != c* of
//                  q(Z_k | c) q(c) / (q(Z_k | c*) q(c*))
struct ProofQuantities {
  double tail_mass = 0.0;
  double prompt_mass = 0.0;
  double input_ratio = 0.0;
  std::vector<double> example_ratios;
};

ProofQuantities proof_quantities(const ModelSpec& spec,
                                 const PromptInstance& instance,
                                 std::span<const int> tail);

struct ProofTermReport {
  double tail_mass_max = 0.0;  // largest tail_mass over the evaluated tails
  double prompt_mass = 0.0;
  double input_ratio = 0.0;
  std::vector<double> example_ratios;
  // Derived upper bounds from the proof:
  double input_ratio_bound = 0.0;             // eps0 / (1 - eps0)
  std::vector<double> example_ratio_bounds;   // eps_k / (1 - eps_k)
  double mass_bound = 0.0;  // gamma^N * input bound * product of example bounds
  // Largest deviation of p_llm from (q_true + tail_mass) / (1 + prompt_mass).
  double reconstruction_max_dev = 0.0;
};

struct HoldsFlags {
  // Absent when the prior is not uniform (the uniform bound does not apply).
  std::optional<bool> theorem_uniform;
  bool theorem_general = false;
  bool tail_mass_bound = false;
  bool prompt_mass_bound = false;
  bool input_ratio_bound = false;
  bool example_ratio_bounds = false;
  bool reconstruction_identity = false;

  bool all() const {
    return theorem_uniform.value_or(true) && theorem_general &&
           tail_mass_bound && prompt_mass_bound && input_ratio_bound &&
           example_ratio_bounds && reconstruction_identity;
  }
};

struct BoundReport {
  std::vector<std::pair<std::vector<int>, double>> per_tail_gaps;
  double max_gap = 0.0;
  double eps_input = 0.0;
  std::vector<double> eps_examples;
  double gamma = 1.0;
  double eta = 0.0;
  double eta_hat = 0.0;
  double rhs_uniform = 0.0;
  double rhs_nonuniform = 0.0;
  std::optional<double> rho;  // delta / (1 - delta), when a delta was given
  bool vacuous = false;       // some ambiguity equals 1
  bool prior_uniform = false;
  ProofTermReport proof;
  HoldsFlags holds;
};

// Evaluates the likelihood gap |p_llm - q_true| for every tail up to
// tail_max_len, the bound's right-hand sides, and all proof intermediates
// with their derived bounds. Inequalities pass at tolerance lhs <= rhs+1e-9.
//
// Tails are independent work items; with Exec::kParallel they are evaluated
// by an OpenMP loop and reduced in tail order, matching the serial path
// exactly.
BoundReport verify_instance(const ModelSpec& spec,
                            const PromptInstance& instance, int tail_max_len,
                            std::optional<double> delta = std::nullopt,
                            Exec exec = Exec::kParallel);

struct SweepRow {
  int n_examples = 0;
  std::uint64_t seed = 0;
  double max_gap = 0.0;
  double eta = 0.0;
  double rhs_uniform = 0.0;
  double rhs_nonuniform = 0.0;
  double eta_rho_pow_n = 0.0;
  bool condition1_satisfied = false;
  bool retry_budget_exhausted = false;
  bool all_hold = false;
};

// For each seed, draws one context and input, then grows a single example
// list: example k is redrawn (bounded by retry_budget) until its ambiguity
// is at most delta, and the row for N reuses the first N examples. Growing
// one list makes the uniform right-hand side shrink monotonically in N.
// Rows that exhausted the budget keep the last complete draw and are
// flagged, not dropped. Rows are ordered by (N, seed).
std::vector<SweepRow> geometric_sweep(const ModelSpec& spec, double delta,
                                      std::span<const int> n_values,
                                      std::span<const std::uint64_t> seeds,
                                      int tail_max_len, int retry_budget,
                                      Exec exec = Exec::kParallel);

}  // namespace cotlab
