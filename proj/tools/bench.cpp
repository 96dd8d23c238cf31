// Compares the serial and OpenMP paths of the two parallel kernels
// (per-tail bound verification, importance-sampling batches) on a model
// large enough to show the difference, and checks that both paths agree.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "cotlab/bounds.hpp"
#include "cotlab/experiment.hpp"
#include "cotlab/mc.hpp"
#include "cotlab/model.hpp"
#include "cotlab/parallel.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
double time_best_of(int reps, F&& work) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto start = Clock::now();
    work();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 3;
  if (argc > 1 && std::strcmp(argv[1], "--quick") == 0) reps = 1;

  cotlab::RandomModelParams params;
  params.n_contexts = 4;
  params.n_intentions = 5;
  params.n_messages = 6;
  params.ambiguity = 0.4;
  params.max_len = 8;
  const cotlab::ModelSpec spec = cotlab::generate_random_model(params, 20240601);

  std::printf("threads available: %d\n\n", cotlab::max_threads());

  {
    const cotlab::PromptInstance instance =
        cotlab::sample_instance_with_retry(spec, std::nullopt, 4, 7, 1000);
    const int tail_len = 4;
    cotlab::BoundReport serial_report, parallel_report;
    double t_serial = time_best_of(reps, [&] {
      serial_report = cotlab::verify_instance(spec, instance, tail_len,
                                              std::nullopt, cotlab::Exec::kSerial);
    });
    double t_parallel = time_best_of(reps, [&] {
      parallel_report = cotlab::verify_instance(
          spec, instance, tail_len, std::nullopt, cotlab::Exec::kParallel);
    });
    const bool identical =
        serial_report.max_gap == parallel_report.max_gap &&
        serial_report.proof.tail_mass_max == parallel_report.proof.tail_mass_max &&
        serial_report.proof.reconstruction_max_dev ==
            parallel_report.proof.reconstruction_max_dev;
    std::printf("verify_instance (%zu tails)\n",
                serial_report.per_tail_gaps.size());
    std::printf("  serial   %8.3f ms\n", t_serial * 1e3);
    std::printf("  openmp   %8.3f ms   speedup %.2fx   identical: %s\n\n",
                t_parallel * 1e3, t_serial / t_parallel,
                identical ? "yes" : "NO");
  }

  {
    const auto chain = cotlab::sample_chain(spec, 0, 99);
    const std::int64_t n = 2'000'000;
    cotlab::McEstimate serial_est, parallel_est;
    double t_serial = time_best_of(reps, [&] {
      serial_est = cotlab::mc_marginal(spec, chain.messages, n, 42,
                                       cotlab::Exec::kSerial);
    });
    double t_parallel = time_best_of(reps, [&] {
      parallel_est = cotlab::mc_marginal(spec, chain.messages, n, 42,
                                         cotlab::Exec::kParallel);
    });
    const bool identical = serial_est.value == parallel_est.value &&
                           serial_est.std_error == parallel_est.std_error;
    std::printf("mc_marginal (%lld samples per context)\n",
                static_cast<long long>(n));
    std::printf("  serial   %8.3f ms\n", t_serial * 1e3);
    std::printf("  openmp   %8.3f ms   speedup %.2fx   identical: %s\n",
                t_parallel * 1e3, t_serial / t_parallel,
                identical ? "yes" : "NO");
  }

  return 0;
}
