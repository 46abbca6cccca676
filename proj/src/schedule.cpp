#include "dbfgs/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dbfgs {

long Schedule::max_gap(int staleness_bound) {
  if (staleness_bound <= 0) return std::numeric_limits<long>::max();
  return std::max(1L, static_cast<long>(staleness_bound - 1) / 2);
}

Schedule Schedule::generate(int n, const ScheduleParams& params) {
  if (n < 1) throw ConfigError("schedule: need at least one node");
  if (!(params.mean_gap >= 1.0)) throw ConfigError("drift_mean: must be >= 1");
  if (!(params.stddev_gap >= 0.0)) throw ConfigError("drift_std: must be >= 0");
  if (params.staleness_bound < 0) throw ConfigError("staleness_bound: must be >= 0");
  if (params.staleness_bound > 0 && params.staleness_bound < 3)
    throw ConfigError("staleness_bound: must be 0 (disabled) or >= 3");
  if (params.horizon < 1) throw ConfigError("horizon: must be >= 1");

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const long cap = max_gap(params.staleness_bound);
  std::vector<std::vector<long>> ticks(n);
  for (int i = 0; i < n; ++i) {
    long t = 0;
    while (t <= params.horizon) {
      ticks[i].push_back(t);
      long gap = std::lround(params.mean_gap + params.stddev_gap * normal(rng));
      t += std::clamp(gap, 1L, cap);
    }
  }
  Schedule s = from_sets(std::move(ticks), params.horizon, params.staleness_bound);
  s.params_ = params;
  return s;
}

Schedule Schedule::from_sets(std::vector<std::vector<long>> ticks, long horizon,
                             int staleness_bound) {
  Schedule s;
  s.horizon_ = horizon;
  s.bound_ = staleness_bound;
  s.params_.horizon = horizon;
  s.params_.staleness_bound = staleness_bound;
  s.mask_.assign(ticks.size(), std::vector<char>(horizon + 1, 0));
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const auto& ti = ticks[i];
    for (std::size_t k = 0; k < ti.size(); ++k) {
      if (ti[k] < 0 || ti[k] > horizon) throw ConfigError("schedule: tick outside [0, horizon]");
      if (k > 0 && ti[k] <= ti[k - 1]) throw ConfigError("schedule: ticks must be increasing");
      s.mask_[i][ti[k]] = 1;
    }
  }
  s.ticks_ = std::move(ticks);
  return s;
}

bool Schedule::available(int i, long t) const {
  return t >= 0 && t <= horizon_ && mask_.at(i)[t];
}

long Schedule::pi(int i, long t) const {
  const auto& ti = ticks_.at(i);
  auto it = std::lower_bound(ti.begin(), ti.end(), t);
  return it == ti.begin() ? 0 : *std::prev(it);
}

long Schedule::pi_neighbor(int i, int j, long t) const { return pi(j, pi(i, t)); }

long Schedule::next_after(int i, long s) const {
  const auto& ti = ticks_.at(i);
  auto it = std::upper_bound(ti.begin(), ti.end(), s);
  return it == ti.end() ? -1 : *it;
}

bool Schedule::satisfies_bound() const {
  if (bound_ <= 0) return true;
  const int n = num_nodes();
  for (long t = 1; t <= horizon_; ++t) {
    const long lo = std::max(0L, t - bound_ + 1);
    for (int i = 0; i < n; ++i) {
      const long pi_i = pi(i, t);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const long v = pi(j, pi_i);
        if (v < lo || v > t) return false;
      }
    }
  }
  return true;
}

}  // namespace dbfgs
