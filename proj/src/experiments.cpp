#include "dbfgs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace dbfgs {

const char* unit_name(ExchangeUnit u) { return u == ExchangeUnit::messages ? "messages" : "rounds"; }

ExchangeUnit parse_unit(const std::string& s) {
  if (s == "rounds") return ExchangeUnit::rounds;
  if (s == "messages") return ExchangeUnit::messages;
  throw ConfigError("unit: unknown value '" + s + "' (expected rounds or messages)");
}

Histogram make_histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("bin_width: must be positive");
  Histogram h;
  h.bin_width = bin_width;
  if (values.empty()) return h;
  const double top = *std::max_element(values.begin(), values.end());
  const auto nbins = static_cast<std::size_t>(std::floor(top / bin_width)) + 1;
  for (std::size_t k = 0; k < nbins; ++k)
    h.bins.push_back({static_cast<double>(k) * bin_width, static_cast<double>(k + 1) * bin_width, 0});
  for (double v : values) {
    if (v < 0.0) throw std::invalid_argument("make_histogram: negative value");
    h.bins[std::min(nbins - 1, static_cast<std::size_t>(std::floor(v / bin_width)))].count++;
  }
  return h;
}

namespace {

double exchanges_of(const IterationRecord& r, ExchangeUnit unit, bool async) {
  if (unit == ExchangeUnit::rounds) return r.comm_rounds;
  return static_cast<double>(async ? r.delivered_msgs : r.comm_msgs);
}

}  // namespace

TrialSummary run_trial(const TrialConfig& config, std::uint64_t seed) {
  TrialSummary s;
  s.seed = seed;
  s.method = config.async ? config.async_run.method : config.sync.method;
  const ProblemInstance prob = generate_quadratic(config.n, config.p, seed, config.regime);
  const Graph graph = regular_cycle(config.n, config.degree);
  try {
    Trace trace;
    if (config.async) {
      AsyncRunConfig run_cfg = config.async_run;
      run_cfg.threshold = config.delta;
      ScheduleParams sp = config.schedule;
      sp.seed = seed;
      sp.horizon = std::max(sp.horizon, run_cfg.max_ticks);
      trace = run_async(run_cfg, prob, graph, Schedule::generate(config.n, sp));
    } else {
      SyncRunConfig run_cfg = config.sync;
      run_cfg.threshold = config.delta;
      trace = run(run_cfg, prob, graph);
    }
    const IterationRecord& last = trace.back();
    s.final_err = last.err;
    s.skips = last.skips;
    s.converged = last.err <= config.delta;
    if (s.converged) {
      s.iters = last.t;
      s.exchanges = exchanges_of(last, config.unit, config.async);
    }
  } catch (const DivergenceError&) {
    s.converged = false;
    s.final_err = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

TrialSet run_trials(const TrialConfig& config, std::span<const std::uint64_t> seeds,
                    double bin_width, int workers) {
  if (seeds.empty()) throw ConfigError("seeds: need at least one trial");
  if (workers < 1) throw ConfigError("workers: must be >= 1");
  TrialSet out;
  out.trials.resize(seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++)
      out.trials[k] = run_trial(config, seeds[k]);
  };
  const int nthreads = std::min<int>(workers, static_cast<int>(seeds.size()));
  if (nthreads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(work);
  }
  std::vector<double> ex;
  for (const auto& t : out.trials)
    if (t.converged) ex.push_back(*t.exchanges);
  out.histogram = make_histogram(ex, bin_width);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size() / 2;
  return values.size() % 2 ? values[k] : 0.5 * (values[k - 1] + values[k]);
}

double median_exchanges(std::span<const TrialSummary> trials) {
  std::vector<double> v;
  for (const auto& t : trials)
    v.push_back(t.converged ? *t.exchanges : std::numeric_limits<double>::infinity());
  return median(std::move(v));
}

GapReport duality_gap_check(const ProblemInstance& prob, const Graph& graph,
                            std::span<const Vec> lambdas, double tol) {
  const Vec x_star = exact_optimum(prob);
  const double f_star = aggregate_value(prob, x_star);
  GapReport r;
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (const Vec& lambda : lambdas) {
    const PrimalBlock x = all_maximizers(prob, graph, lambda);
    const double d = primal_distance(x, x_star);
    const double lhs = 0.5 * prob.mu() * d * d;
    const double rhs = dual_value(prob, graph, lambda) - f_star + tol;
    r.max_violation = std::max(r.max_violation, lhs - rhs);
    if (lhs > rhs) ++r.violations;
    ++r.samples;
  }
  return r;
}

}  // namespace dbfgs
