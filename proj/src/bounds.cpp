#include "cotlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cotlab/ambiguity.hpp"
#include "cotlab/errors.hpp"
#include "cotlab/inference.hpp"
#include "cotlab/logspace.hpp"

namespace cotlab {

namespace {

constexpr double kHoldsTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

double odds(double eps) { return eps >= 1.0 ? kInf : eps / (1.0 - eps); }

bool prior_is_uniform(const ModelSpec& spec) {
  const double uniform = 1.0 / static_cast<double>(spec.n_contexts());
  for (double q : spec.context_prior) {
    if (std::abs(q - uniform) > 1e-12) return false;
  }
  return true;
}

// eps / (1 - eps) products for the examples; infinite if any eps is 1.
double example_odds_product(std::span<const double> eps_examples,
                            bool* vacuous) {
  double product = 1.0;
  for (double eps : eps_examples) {
    if (eps >= 1.0) {
      *vacuous = true;
      return kInf;
    }
    product *= odds(eps);
  }
  return product;
}

bool leq_with_tol(double lhs, double rhs) { return lhs <= rhs + kHoldsTol; }

// Per-context log factors shared by every tail of one instance.
struct InstanceFactors {
  std::vector<double> prompt;     // log q(c) + sum_k log q(Z_k | c)
  std::vector<double> input;      // log q(input | c)
  std::vector<double> log_prior;  // log q(c), -inf for zero prior
  double den_all = kNegInf;       // log prompt_marginal(examples, input)
  double den_star = kNegInf;      // log q(examples, input, c*)
};

InstanceFactors instance_factors(const ModelSpec& spec,
                                 const PromptInstance& instance) {
  const int n_c = spec.n_contexts();
  InstanceFactors factors;
  factors.prompt.assign(n_c, kNegInf);
  factors.input.assign(n_c, kNegInf);
  factors.log_prior.assign(n_c, kNegInf);
  LogSumAcc den_all;
  for (int c = 0; c < n_c; ++c) {
    if (spec.context_prior[c] <= 0.0) continue;
    factors.log_prior[c] = std::log(spec.context_prior[c]);
    double lp = factors.log_prior[c];
    for (const LabeledChain& example : instance.examples) {
      lp += prefix_log_prob_given_context(spec, example.messages, c);
      if (lp == kNegInf) break;
    }
    factors.prompt[c] = lp;
    factors.input[c] =
        prefix_log_prob_given_context(spec, instance.input.messages, c);
    if (lp != kNegInf) den_all.add(lp + factors.input[c]);
  }
  factors.den_all = den_all.log_total();
  const int c_star = instance.true_context;
  factors.den_star = factors.prompt[c_star] + factors.input[c_star];
  return factors;
}

void check_instance(const ModelSpec& spec, const PromptInstance& instance) {
  if (instance.true_context < 0 ||
      instance.true_context >= spec.n_contexts()) {
    throw std::invalid_argument("instance: true_context index out of range");
  }
  if (instance.input.messages.empty()) {
    throw std::invalid_argument("instance: input prefix is empty");
  }
  for (const LabeledChain& example : instance.examples) {
    if (!example.complete) {
      throw std::invalid_argument("instance: examples must be complete chains");
    }
  }
}

}  // namespace

TheoremRhs theorem_rhs(const ModelSpec& spec, const PromptInstance& instance,
                       PriorMode mode) {
  check_instance(spec, instance);
  if (mode == PriorMode::kUniformAsserted && !prior_is_uniform(spec)) {
    throw PriorNotUniform("theorem_rhs: uniform-asserted mode on a non-uniform prior");
  }

  const double eps0 = input_ambiguity(spec, instance.input);
  TheoremRhs result;
  result.vacuous = eps0 >= 1.0;

  double constant_scale = 2.0;
  if (mode == PriorMode::kGeneral) {
    const double gamma = skewness(spec, instance.true_context);
    constant_scale *= std::pow(gamma, static_cast<double>(instance.examples.size()));
  }
  result.constant = result.vacuous ? kInf : constant_scale * odds(eps0);

  std::vector<double> eps_examples;
  eps_examples.reserve(instance.examples.size());
  for (const LabeledChain& example : instance.examples) {
    eps_examples.push_back(chain_ambiguity(spec, example));
  }
  bool vacuous_examples = false;
  const double product = example_odds_product(eps_examples, &vacuous_examples);
  result.vacuous = result.vacuous || vacuous_examples;
  result.rhs = result.vacuous ? kInf : result.constant * product;
  return result;
}

ProofQuantities proof_quantities(const ModelSpec& spec,
                                 const PromptInstance& instance,
                                 std::span<const int> tail) {
  check_instance(spec, instance);
  const InstanceFactors factors = instance_factors(spec, instance);
  const int c_star = instance.true_context;
  if (factors.den_star == kNegInf) {
    throw ConditioningOnNullEvent(
        "proof_quantities: prompt has probability zero under the true context");
  }

  const std::vector<int> full = concat(instance.input.messages, tail);
  ProofQuantities result;
  LogSumAcc tail_mass, prompt_mass, input_ratio;
  for (int c = 0; c < spec.n_contexts(); ++c) {
    if (c == c_star || factors.log_prior[c] == kNegInf) continue;
    tail_mass.add(factors.prompt[c] +
                  prefix_log_prob_given_context(spec, full, c) -
                  factors.den_star);
    prompt_mass.add(factors.prompt[c] + factors.input[c] - factors.den_star);
    input_ratio.add(factors.log_prior[c] + factors.input[c] -
                    factors.log_prior[c_star] - factors.input[c_star]);
  }
  result.tail_mass = tail_mass.empty() ? 0.0 : std::exp(tail_mass.log_total());
  result.prompt_mass =
      prompt_mass.empty() ? 0.0 : std::exp(prompt_mass.log_total());
  result.input_ratio =
      input_ratio.empty() ? 0.0 : std::exp(input_ratio.log_total());

  result.example_ratios.reserve(instance.examples.size());
  for (const LabeledChain& example : instance.examples) {
    LogSumAcc ratio;
    const double star_log =
        factors.log_prior[c_star] +
        prefix_log_prob_given_context(spec, example.messages, c_star);
    for (int c = 0; c < spec.n_contexts(); ++c) {
      if (c == c_star || factors.log_prior[c] == kNegInf) continue;
      ratio.add(factors.log_prior[c] +
                prefix_log_prob_given_context(spec, example.messages, c) -
                star_log);
    }
    result.example_ratios.push_back(ratio.empty() ? 0.0
                                                  : std::exp(ratio.log_total()));
  }
  return result;
}

BoundReport verify_instance(const ModelSpec& spec,
                            const PromptInstance& instance, int tail_max_len,
                            std::optional<double> delta, Exec exec) {
  check_instance(spec, instance);
  const int c_star = instance.true_context;
  const int n_examples = static_cast<int>(instance.examples.size());

  const InstanceFactors factors = instance_factors(spec, instance);
  if (factors.den_all == kNegInf) {
    throw ConditioningOnNullEvent("verify_instance: prompt has probability zero");
  }
  if (factors.input[c_star] == kNegInf) {
    throw ConditioningOnNullEvent(
        "verify_instance: input has probability zero under the true context");
  }
  if (factors.den_star == kNegInf) {
    throw ConditioningOnNullEvent(
        "verify_instance: examples have probability zero under the true context");
  }

  BoundReport report;
  report.prior_uniform = prior_is_uniform(spec);
  report.gamma = skewness(spec, c_star);
  report.eps_input = input_ambiguity(spec, instance.input);
  report.eps_examples.reserve(n_examples);
  for (const LabeledChain& example : instance.examples) {
    report.eps_examples.push_back(chain_ambiguity(spec, example));
  }

  bool vacuous = report.eps_input >= 1.0;
  const double example_product =
      example_odds_product(report.eps_examples, &vacuous);
  report.vacuous = vacuous;
  report.eta = vacuous && report.eps_input >= 1.0 ? kInf : 2.0 * odds(report.eps_input);
  const double gamma_pow = std::pow(report.gamma, static_cast<double>(n_examples));
  report.eta_hat = report.eta == kInf ? kInf : gamma_pow * report.eta;
  report.rhs_uniform = vacuous ? kInf : report.eta * example_product;
  report.rhs_nonuniform = vacuous ? kInf : report.eta_hat * example_product;
  if (delta.has_value()) report.rho = *delta / (1.0 - *delta);

  // Proof-term bounds: input_ratio <= eps0/(1-eps0), example_ratio_k <=
  // eps_k/(1-eps_k), and both cross-context masses are capped by gamma^N
  // times the product of all of those.
  report.proof.input_ratio_bound = odds(report.eps_input);
  report.proof.example_ratio_bounds.reserve(n_examples);
  for (double eps : report.eps_examples) {
    report.proof.example_ratio_bounds.push_back(odds(eps));
  }
  report.proof.mass_bound =
      vacuous ? kInf : gamma_pow * odds(report.eps_input) * example_product;

  // Tail-independent proof terms.
  {
    LogSumAcc prompt_mass, input_ratio;
    for (int c = 0; c < spec.n_contexts(); ++c) {
      if (c == c_star || factors.log_prior[c] == kNegInf) continue;
      prompt_mass.add(factors.prompt[c] + factors.input[c] - factors.den_star);
      input_ratio.add(factors.log_prior[c] + factors.input[c] -
                      factors.log_prior[c_star] - factors.input[c_star]);
    }
    report.proof.prompt_mass =
        prompt_mass.empty() ? 0.0 : std::exp(prompt_mass.log_total());
    report.proof.input_ratio =
        input_ratio.empty() ? 0.0 : std::exp(input_ratio.log_total());
  }
  report.proof.example_ratios.reserve(n_examples);
  for (int k = 0; k < n_examples; ++k) {
    LogSumAcc ratio;
    const double star_log = factors.log_prior[c_star] +
                            prefix_log_prob_given_context(
                                spec, instance.examples[k].messages, c_star);
    for (int c = 0; c < spec.n_contexts(); ++c) {
      if (c == c_star || factors.log_prior[c] == kNegInf) continue;
      ratio.add(factors.log_prior[c] +
                prefix_log_prob_given_context(
                    spec, instance.examples[k].messages, c) -
                star_log);
    }
    report.proof.example_ratios.push_back(
        ratio.empty() ? 0.0 : std::exp(ratio.log_total()));
  }

  // Per-tail gaps, tail masses, and the reconstruction identity.
  const std::vector<std::vector<int>> tails = enumerate_tails(spec, tail_max_len);
  std::vector<double> gaps(tails.size());
  std::vector<double> tail_masses(tails.size());
  std::vector<double> recon_devs(tails.size());
  parallel_for(tails.size(), exec, [&](std::size_t i) {
    const std::vector<int> full = concat(instance.input.messages, tails[i]);
    LogSumAcc numerator;
    LogSumAcc off_context;
    double full_star = kNegInf;
    for (int c = 0; c < spec.n_contexts(); ++c) {
      if (factors.log_prior[c] == kNegInf || factors.prompt[c] == kNegInf) {
        continue;
      }
      const double full_log = prefix_log_prob_given_context(spec, full, c);
      if (c == c_star) full_star = full_log;
      numerator.add(factors.prompt[c] + full_log);
      if (c != c_star) {
        off_context.add(factors.prompt[c] + full_log - factors.den_star);
      }
    }
    const double p_llm = numerator.empty()
                             ? 0.0
                             : std::exp(numerator.log_total() - factors.den_all);
    const double q_true = std::exp(full_star - factors.input[c_star]);
    gaps[i] = std::abs(p_llm - q_true);
    tail_masses[i] =
        off_context.empty() ? 0.0 : std::exp(off_context.log_total());
    recon_devs[i] = std::abs(
        p_llm - (q_true + tail_masses[i]) / (1.0 + report.proof.prompt_mass));
  });

  report.per_tail_gaps.reserve(tails.size());
  for (std::size_t i = 0; i < tails.size(); ++i) {
    report.per_tail_gaps.push_back({tails[i], gaps[i]});
    report.max_gap = std::max(report.max_gap, gaps[i]);
    report.proof.tail_mass_max =
        std::max(report.proof.tail_mass_max, tail_masses[i]);
    report.proof.reconstruction_max_dev =
        std::max(report.proof.reconstruction_max_dev, recon_devs[i]);
  }

  if (report.prior_uniform) {
    report.holds.theorem_uniform = leq_with_tol(report.max_gap, report.rhs_uniform);
  }
  report.holds.theorem_general = leq_with_tol(report.max_gap, report.rhs_nonuniform);
  report.holds.tail_mass_bound =
      leq_with_tol(report.proof.tail_mass_max, report.proof.mass_bound);
  report.holds.prompt_mass_bound =
      leq_with_tol(report.proof.prompt_mass, report.proof.mass_bound);
  report.holds.input_ratio_bound =
      leq_with_tol(report.proof.input_ratio, report.proof.input_ratio_bound);
  report.holds.example_ratio_bounds = true;
  for (int k = 0; k < n_examples; ++k) {
    report.holds.example_ratio_bounds =
        report.holds.example_ratio_bounds &&
        leq_with_tol(report.proof.example_ratios[k],
                     report.proof.example_ratio_bounds[k]);
  }
  report.holds.reconstruction_identity =
      report.proof.reconstruction_max_dev <= kHoldsTol;
  return report;
}

std::vector<SweepRow> geometric_sweep(const ModelSpec& spec, double delta,
                                      std::span<const int> n_values,
                                      std::span<const std::uint64_t> seeds,
                                      int tail_max_len, int retry_budget,
                                      Exec exec) {
  if (!(delta >= 0.0 && delta < 0.5)) {
    throw std::invalid_argument("geometric_sweep: delta must lie in [0, 0.5)");
  }
  if (retry_budget < 1) {
    throw std::invalid_argument("geometric_sweep: retry_budget < 1");
  }
  int max_n = 0;
  for (int n : n_values) {
    if (n < 0) throw std::invalid_argument("geometric_sweep: negative N");
    max_n = std::max(max_n, n);
  }
  const double rho = delta / (1.0 - delta);

  struct Family {
    PromptInstance base;                 // input + context; examples grow
    std::vector<LabeledChain> examples;  // accepted, in draw order
    std::vector<bool> accepted_ok;       // ambiguity <= delta within budget
  };

  std::vector<Family> families(seeds.size());
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    Rng base(seeds[s]);
    Rng context_stream = base.substream(0);
    const int c_star = context_stream.next_categorical(spec.context_prior);
    Rng input_stream = base.substream(1);
    Family& family = families[s];
    family.base.true_context = c_star;
    family.base.input = sample_input_prefix(spec, c_star, input_stream);

    for (int k = 0; k < max_n; ++k) {
      Rng example_streams = base.substream(2 + static_cast<std::uint64_t>(k));
      bool ok = false;
      std::optional<LabeledChain> fallback;
      for (int attempt = 0; attempt < retry_budget; ++attempt) {
        Rng attempt_stream = example_streams.substream(attempt);
        LabeledChain chain;
        try {
          chain = sample_chain(spec, c_star, attempt_stream);
        } catch (const TruncationError&) {
          continue;
        }
        fallback = chain;
        if (chain_ambiguity(spec, chain) <= delta) {
          family.examples.push_back(std::move(chain));
          ok = true;
          break;
        }
      }
      if (!ok) {
        if (!fallback.has_value()) {
          throw TruncationError(
              "geometric_sweep: no complete example within the retry budget");
        }
        family.examples.push_back(std::move(*fallback));
      }
      family.accepted_ok.push_back(ok);
    }
  }

  std::vector<SweepRow> rows;
  rows.reserve(n_values.size() * seeds.size());
  for (int n : n_values) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const Family& family = families[s];
      PromptInstance instance = family.base;
      instance.examples.assign(family.examples.begin(),
                               family.examples.begin() + n);
      BoundReport report = verify_instance(spec, instance, tail_max_len, delta, exec);

      SweepRow row;
      row.n_examples = n;
      row.seed = seeds[s];
      row.max_gap = report.max_gap;
      row.eta = report.eta;
      row.rhs_uniform = report.rhs_uniform;
      row.rhs_nonuniform = report.rhs_nonuniform;
      row.eta_rho_pow_n = report.eta * std::pow(rho, static_cast<double>(n));
      row.condition1_satisfied = true;
      row.retry_budget_exhausted = false;
      for (int k = 0; k < n; ++k) {
        row.condition1_satisfied =
            row.condition1_satisfied && family.accepted_ok[k];
        row.retry_budget_exhausted =
            row.retry_budget_exhausted || !family.accepted_ok[k];
      }
      row.all_hold = report.holds.all();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace cotlab
