#pragma once

#include "dbfgs/common.hpp"

#include <optional>
#include <span>
#include <vector>

namespace dbfgs {

/// One row of a run trace. For the asynchronous engine t counts global
/// ticks and comm_rounds is delivered messages divided by the directed edge
/// count (one full round delivers one message per directed edge).
struct IterationRecord {
  long t = 0;
  double h = 0.0;
  double grad_norm = 0.0;
  double err = 0.0;
  double comm_rounds = 0.0;
  long comm_msgs = 0;
  long skips = 0;
  // asynchronous engine only
  long delivered_msgs = 0;
  long max_staleness = 0;
};

using Trace = std::vector<IterationRecord>;

/// e = (1/n) sum_i |x_i - x*|^2 / |x*|^2. Throws std::domain_error when x* = 0.
double normalized_error(const PrimalBlock& x, const Vec& x_star);

/// |x - 1 (x) x*| over the stacked primal copies.
double primal_distance(const PrimalBlock& x, const Vec& x_star);

/// First index whose error is <= threshold.
std::optional<long> convergence_time(std::span<const double> errors, double threshold);
std::optional<long> convergence_time(const Trace& trace, double threshold);

}  // namespace dbfgs
