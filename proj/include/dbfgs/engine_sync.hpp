#pragma once

#include "dbfgs/curvature.hpp"
#include "dbfgs/dual_core.hpp"
#include "dbfgs/metrics.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dbfgs {

struct SyncRunConfig {
  Method method = Method::dbfgs;
  double stepsize = 0.01;
  long max_iters = 500;
  double gamma = 1e-2;
  double big_gamma = 1e-3;
  /// B^i(0) = initial_scale * I.
  double initial_scale = 1.0;
  /// Stop once err <= threshold; unset runs all max_iters iterations.
  std::optional<double> threshold;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Round-synchronous simulator for D-BFGS and dual descent.
///
/// Every node reads neighbor data from the previous exchange (barrier
/// semantics). D-BFGS spends four exchange rounds per iteration (descent
/// components, multipliers, primal maximizers, gradients); dual descent two
/// (multipliers, primal maximizers). lambda(0) = 0.
class SyncEngine {
 public:
  SyncEngine(SyncRunConfig config, const ProblemInstance& prob, const Graph& graph,
             std::optional<Vec> x_star = std::nullopt);

  void step();

  long iteration() const { return t_; }
  const DualState& state() const { return state_; }
  const std::vector<NeighborhoodCurvature>& curvatures() const { return curv_; }
  const std::vector<NeighborhoodIndex>& indices() const { return idx_; }
  /// Direction applied by the last D-BFGS step (lambda += eps d).
  const Vec& last_direction() const { return last_direction_; }
  long skips() const;

  IterationRecord record() const;

 private:
  void step_dbfgs();
  void step_dual_descent();
  void refresh_primal_and_gradient();
  void check_finite() const;

  SyncRunConfig cfg_;
  const ProblemInstance& prob_;
  const Graph& graph_;
  std::optional<Vec> x_star_;
  DualState state_;
  std::vector<NeighborhoodIndex> idx_;
  std::vector<NeighborhoodCurvature> curv_;
  Vec last_direction_;
  long t_ = 0;
  double comm_rounds_ = 0;
  long comm_msgs_ = 0;
};

/// Optimum used for err: exact_optimum for quadratic instances, none when
/// the instance is not quadratic or the optimum is zero (err undefined).
std::optional<Vec> reference_optimum(const ProblemInstance& prob);

/// h, |g| and err for a consistent state (err is NaN without an optimum).
IterationRecord observe_state(const ProblemInstance& prob, const DualState& s,
                              const std::optional<Vec>& x_star);

/// Records t = 0 (initial state) and one row per iteration. Deterministic in
/// (config, prob, graph). Throws DivergenceError on non-finite iterates.
Trace run(const SyncRunConfig& config, const ProblemInstance& prob, const Graph& graph);

}  // namespace dbfgs
