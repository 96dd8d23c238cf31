#include "cotlab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cotlab/errors.hpp"
#include "cotlab/rng.hpp"

namespace cotlab {

namespace {

constexpr std::int64_t kBatchSize = 1024;

// Welford accumulator; exact (zero) variance for constant weight streams.
struct RunningMoments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  // Chan's pairwise combination; callers merge batches in index order.
  void merge(const RunningMoments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    double delta = other.mean - mean;
    std::int64_t total = count + other.count;
    mean += delta * static_cast<double>(other.count) / static_cast<double>(total);
    m2 += other.m2 + delta * delta * static_cast<double>(count) *
                         static_cast<double>(other.count) /
                         static_cast<double>(total);
    count = total;
  }
};

struct PrefixTarget {
  bool impossible = false;
  bool complete = false;
  std::size_t n_content = 0;
};

PrefixTarget classify(const ModelSpec& spec, std::span<const int> messages) {
  PrefixTarget target;
  for (std::size_t i = 0; i + 1 < messages.size(); ++i) {
    if (messages[i] == spec.stop_symbol) target.impossible = true;
  }
  target.complete = !messages.empty() && messages.back() == spec.stop_symbol;
  target.n_content = messages.size() - (target.complete ? 1 : 0);
  if (target.complete && target.n_content == 0) target.impossible = true;
  return target;
}

double sample_weight(const ModelSpec& spec, std::span<const int> messages,
                     int c, const PrefixTarget& target, Rng& rng) {
  double w = 1.0;
  int intention = rng.next_categorical(spec.init_intention[c]);
  w *= spec.emission[intention][messages[0]];
  std::string key;
  for (std::size_t i = 1; i < target.n_content && w > 0.0; ++i) {
    if (spec.transitions.family == KernelFamily::kMarkov) key.clear();
    ModelSpec::append_history_key(key, spec, intention, messages[i - 1]);
    const std::vector<double>* row = spec.transition_row(c, key);
    if (row == nullptr) {
      throw Error("missing transition row (" + spec.contexts[c] + ", '" + key +
                  "'); run validate_model");
    }
    intention = rng.next_categorical(*row);
    w *= spec.emission[intention][messages[i]];
  }
  if (target.complete && w > 0.0) {
    if (spec.transitions.family == KernelFamily::kMarkov) key.clear();
    ModelSpec::append_history_key(key, spec, intention,
                                  messages[target.n_content - 1]);
    const std::vector<double>* row = spec.transition_row(c, key);
    if (row == nullptr) {
      throw Error("missing transition row (" + spec.contexts[c] + ", '" + key +
                  "'); run validate_model");
    }
    w *= (*row)[spec.terminal_intention] *
         spec.emission[spec.terminal_intention][spec.stop_symbol];
  }
  return w;
}

McEstimate finalize(const RunningMoments& stats, double sum_sq) {
  McEstimate estimate;
  estimate.n_samples = stats.count;
  estimate.value = stats.count == 0 ? 0.0 : stats.mean;
  if (stats.count > 1 && stats.m2 > 0.0) {
    estimate.std_error = std::sqrt(stats.m2 / static_cast<double>(stats.count - 1) /
                                 static_cast<double>(stats.count));
  }
  if (sum_sq > 0.0) {
    double sum = stats.mean * static_cast<double>(stats.count);
    // Cauchy-Schwarz caps the ratio at the sample count; rounding can nudge
    // it past for constant weights.
    estimate.ess = std::min(sum * sum / sum_sq, static_cast<double>(stats.count));
  }
  return estimate;
}

}  // namespace

McEstimate mc_prefix_prob(const ModelSpec& spec, std::span<const int> messages,
                          int c, std::int64_t n_samples, std::uint64_t seed,
                          Exec exec) {
  if (n_samples < 1) throw std::invalid_argument("mc_prefix_prob: n_samples < 1");
  if (messages.empty()) {
    return McEstimate{1.0, 0.0, n_samples, static_cast<double>(n_samples)};
  }
  const PrefixTarget target = classify(spec, messages);
  if (target.impossible) return McEstimate{0.0, 0.0, n_samples, 0.0};

  const std::size_t n_batches =
      static_cast<std::size_t>((n_samples + kBatchSize - 1) / kBatchSize);
  std::vector<RunningMoments> batch_stats(n_batches);
  std::vector<double> batch_sum_sq(n_batches, 0.0);
  const Rng base(seed);

  parallel_for(n_batches, exec, [&](std::size_t j) {
    Rng rng = base.substream(j);
    const std::int64_t begin = static_cast<std::int64_t>(j) * kBatchSize;
    const std::int64_t count = std::min(kBatchSize, n_samples - begin);
    RunningMoments& stats = batch_stats[j];
    for (std::int64_t s = 0; s < count; ++s) {
      double w = sample_weight(spec, messages, c, target, rng);
      stats.add(w);
      batch_sum_sq[j] += w * w;
    }
  });

  RunningMoments total;
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < n_batches; ++j) {
    total.merge(batch_stats[j]);
    sum_sq += batch_sum_sq[j];
  }
  return finalize(total, sum_sq);
}

McEstimate mc_marginal(const ModelSpec& spec, std::span<const int> messages,
                       std::int64_t n_samples, std::uint64_t seed, Exec exec) {
  const Rng base(seed);
  McEstimate combined;
  double variance = 0.0;
  for (int c = 0; c < spec.n_contexts(); ++c) {
    Rng stream = base.substream(static_cast<std::uint64_t>(c));
    McEstimate part = mc_prefix_prob(spec, messages, c, n_samples,
                                     stream.next_u64(), exec);
    const double q = spec.context_prior[c];
    combined.value += q * part.value;
    variance += q * q * part.std_error * part.std_error;
    combined.n_samples += part.n_samples;
    combined.ess += part.ess;
  }
  combined.std_error = std::sqrt(variance);
  return combined;
}

}  // namespace cotlab
