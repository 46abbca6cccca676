#pragma once

#include "dbfgs/curvature.hpp"
#include "dbfgs/dual_core.hpp"
#include "dbfgs/metrics.hpp"
#include "dbfgs/schedule.hpp"

#include <optional>
#include <vector>

namespace dbfgs {

/// How much of an iteration a node performs per availability.
enum class AsyncVariant {
  /// Every availability runs the whole read / update / send loop and sends
  /// one bundle (multipliers, primal, gradient, descent components).
  single_exchange,
  /// Every availability runs one exchange phase of the synchronous iteration
  /// (D-BFGS: apply, primal, gradient, curvature; dual descent: apply,
  /// primal) and sends one bundle. On the every-tick schedule this replays
  /// the synchronous engine: synchronous iteration k ends at tick
  /// phases*(k+1) - 1, and the multipliers after tick phases*k equal
  /// lambda(k+1).
  phased,
};

const char* variant_name(AsyncVariant v);
AsyncVariant parse_variant(const std::string& s);

/// Number of availabilities per synchronous iteration under the phased variant.
int phases_per_iteration(Method m);

struct AsyncRunConfig {
  Method method = Method::dbfgs;
  double stepsize = 0.007;
  double gamma = 1e-2;
  double big_gamma = 1e-3;
  double initial_scale = 1.0;
  /// Stop once err <= threshold.
  std::optional<double> threshold;
  /// Ticks to simulate; at most the schedule horizon.
  long max_ticks = 10000;
  AsyncVariant variant = AsyncVariant::single_exchange;

  void validate() const;
};

/// What one node sends to one neighbor at one availability.
struct Bundle {
  int sender = 0;
  long sent_at = 0;
  Vec lambda;
  Vec x;
  Vec g;
  /// e^sender_recipient, present when the sender computed a new direction.
  std::optional<Vec> e;
};

/// A view of a neighbor fell outside the partial-asynchrony window.
class StalenessViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discrete-event simulator of the asynchronous engines.
///
/// A message sent at tick s becomes readable at the recipient's first
/// availability strictly after s; a recipient drains its mailbox in (sender,
/// send time) order. Before each tick every view is checked against
/// Schedule::pi_neighbor and, when the bound is enabled, against the
/// partial-asynchrony window. Nodes not available at a tick do nothing.
/// Global metrics come from an observer that stacks each node's own
/// multipliers and never feeds back.
class AsyncEngine {
 public:
  AsyncEngine(AsyncRunConfig config, const ProblemInstance& prob, const Graph& graph,
              const Schedule& schedule, std::optional<Vec> x_star = std::nullopt);

  /// Processes tick now() and advances the clock.
  void tick();

  long now() const { return t_; }
  Vec global_lambda() const;
  IterationRecord record() const;
  long skips() const;
  long delivered() const { return delivered_; }
  /// Received descent components in node i's last applied direction.
  long applied_components(int i) const { return nodes_.at(i).last_received; }
  const NeighborhoodCurvature& curvature(int i) const { return *nodes_.at(i).curv; }

 private:
  struct NodeState {
    Vec lambda, x, g;
    // views of neighbors, indexed by neighbor rank
    std::vector<Vec> view_lambda, view_x, view_g;
    std::vector<long> view_stamp;
    std::vector<std::vector<Vec>> received_e;
    std::optional<Vec> pending_own_e;
    Vec snap_lambda, snap_g;
    std::optional<NeighborhoodCurvature> curv;
    NeighborhoodIndex idx;
    int phase = 0;
    long last_received = 0;
  };

  void check_views();
  void drain(int i);
  void process(int i);
  void apply_direction(NodeState& s);
  void recover_primal(int i, NodeState& s);
  void refresh_gradient(int i, NodeState& s);
  void curvature_and_direction(int i, NodeState& s);
  void send(int i, NodeState& s, const std::vector<DirectionBlock>* parts);
  Vec neighborhood_lambda(const NodeState& s) const;
  Vec neighborhood_gradient(const NodeState& s) const;
  int rank_of(int i, int j) const;

  AsyncRunConfig cfg_;
  const ProblemInstance& prob_;
  const Graph& graph_;
  const Schedule& schedule_;
  std::optional<Vec> x_star_;
  std::vector<NodeState> nodes_;
  std::vector<std::vector<Bundle>> inbox_;
  long t_ = 0;
  long delivered_ = 0;
  long sent_ = 0;
  long max_staleness_ = 0;
};

/// Record 0 is the initial state; record k follows tick k-1.
Trace run_async(const AsyncRunConfig& config, const ProblemInstance& prob, const Graph& graph,
                const Schedule& schedule);

}  // namespace dbfgs
