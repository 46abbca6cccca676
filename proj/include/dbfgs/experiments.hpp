#pragma once

#include "dbfgs/engine_async.hpp"
#include "dbfgs/engine_sync.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dbfgs {

/// Unit used for exchanges-to-converge.
enum class ExchangeUnit {
  /// Neighbor exchange rounds (async: delivered messages per directed edge).
  rounds,
  /// Individual per-edge messages (async: delivered messages).
  messages,
};

const char* unit_name(ExchangeUnit u);
ExchangeUnit parse_unit(const std::string& s);

/// Everything needed to build and solve one trial from its seed.
struct TrialConfig {
  int n = 50;
  int p = 4;
  int degree = 4;
  ConditionRegime regime = ConditionRegime::split_1e2;
  /// Convergence threshold on e(t).
  double delta = 1e-2;
  bool async = false;
  SyncRunConfig sync;
  AsyncRunConfig async_run;
  /// The schedule seed is replaced by the trial seed.
  ScheduleParams schedule;
  ExchangeUnit unit = ExchangeUnit::rounds;
};

struct TrialSummary {
  std::uint64_t seed = 0;
  Method method = Method::dbfgs;
  bool converged = false;
  /// Iterations (sync) or ticks (async) to reach delta.
  std::optional<long> iters;
  std::optional<double> exchanges;
  /// Error at the last recorded step; NaN after divergence.
  double final_err = 0.0;
  long skips = 0;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
};

struct Histogram {
  double bin_width = 0.0;
  std::vector<HistogramBin> bins;
};

/// Bins [k w, (k+1) w) from 0 up to the largest value.
Histogram make_histogram(std::span<const double> values, double bin_width);

struct TrialSet {
  std::vector<TrialSummary> trials;
  /// Exchanges-to-converge of the converged trials.
  Histogram histogram;
};

/// One trial: a fresh instance, a fresh schedule when asynchronous.
TrialSummary run_trial(const TrialConfig& config, std::uint64_t seed);

/// Trials in seed order. Divergent or unconverged trials are kept with
/// converged = false. workers > 1 runs trials on that many threads; the
/// result does not depend on it.
TrialSet run_trials(const TrialConfig& config, std::span<const std::uint64_t> seeds,
                    double bin_width, int workers = 1);

/// Median of exchanges-to-converge with unconverged trials counted as +inf.
double median_exchanges(std::span<const TrialSummary> trials);

double median(std::vector<double> values);

struct GapReport {
  long samples = 0;
  long violations = 0;
  /// max over samples of lhs - rhs (negative when all hold).
  double max_violation = 0.0;
};

/// Checks mu/2 |x(lambda) - 1 (x) x*|^2 <= h(lambda) - f(x*) + tol for every
/// sample, with h(lambda*) = f(x*) by zero duality gap.
GapReport duality_gap_check(const ProblemInstance& prob, const Graph& graph,
                            std::span<const Vec> lambdas, double tol = 1e-8);

}  // namespace dbfgs
