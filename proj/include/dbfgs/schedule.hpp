#pragma once

#include "dbfgs/common.hpp"

#include <cstdint>
#include <vector>

namespace dbfgs {

struct ScheduleParams {
  /// Mean and spread of the gap between successive availabilities.
  double mean_gap = 3.0;
  double stddev_gap = 1.0;
  /// Partial-asynchrony constant B; 0 disables the bound.
  int staleness_bound = 12;
  long horizon = 10000;
  std::uint64_t seed = 0;
};

/// Availability sets T_i over the ticks [0, horizon].
class Schedule {
 public:
  /// Gaussian inter-availability gaps accumulated from tick 0: each gap is
  /// max(1, round(mean + stddev z)) with z standard normal, clamped to
  /// max_gap(staleness_bound). One std::mt19937_64 stream, nodes in id order.
  static Schedule generate(int n, const ScheduleParams& params);

  /// Explicit availability sets (each sorted, unique, within [0, horizon]).
  static Schedule from_sets(std::vector<std::vector<long>> ticks, long horizon,
                            int staleness_bound = 0);

  /// Largest gap that keeps pi_neighbor inside [t - B + 1, t]: the composed
  /// lag of two gaps must stay below B.
  static long max_gap(int staleness_bound);

  int num_nodes() const { return static_cast<int>(ticks_.size()); }
  long horizon() const { return horizon_; }
  int staleness_bound() const { return bound_; }
  const ScheduleParams& params() const { return params_; }
  const std::vector<long>& ticks(int i) const { return ticks_.at(i); }

  bool available(int i, long t) const;
  /// max{s in T_i : s < t}, or 0 when there is none.
  long pi(int i, long t) const;
  /// pi^j(pi^i(t)): send time of the newest j-message i has read before t.
  long pi_neighbor(int i, int j, long t) const;
  /// First tick of T_i strictly after s, or -1.
  long next_after(int i, long s) const;

  /// True when max(0, t-B+1) <= pi_neighbor(i,j,t) <= t for all i != j and
  /// 1 <= t <= horizon. Always true with the bound disabled.
  bool satisfies_bound() const;

 private:
  std::vector<std::vector<long>> ticks_;
  std::vector<std::vector<char>> mask_;
  long horizon_ = 0;
  int bound_ = 0;
  ScheduleParams params_;
};

}  // namespace dbfgs
