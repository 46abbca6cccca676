#include "dbfgs/engine_sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dbfgs {

void SyncRunConfig::validate() const {
  if (!(stepsize > 0.0) || !std::isfinite(stepsize)) throw ConfigError("eps: must be positive");
  if (max_iters < 1) throw ConfigError("iters: must be >= 1");
  if (!(gamma > 0.0)) throw ConfigError("gamma: must be positive");
  if (!(big_gamma > 0.0)) throw ConfigError("Gamma: must be positive");
  if (!(initial_scale >= gamma)) throw ConfigError("init_scale: must be >= gamma");
  if (threshold && !(*threshold > 0.0)) throw ConfigError("threshold: must be positive");
}

SyncEngine::SyncEngine(SyncRunConfig config, const ProblemInstance& prob, const Graph& graph,
                       std::optional<Vec> x_star)
    : cfg_(std::move(config)), prob_(prob), graph_(graph), x_star_(std::move(x_star)) {
  cfg_.validate();
  if (prob.num_nodes() != graph.num_nodes())
    throw ConfigError("problem and graph disagree on the node count");
  if (!x_star_) x_star_ = reference_optimum(prob);
  state_ = make_dual_state(prob, graph, Vec::Zero(static_cast<Index>(graph.num_edges()) * prob.dim()));
  if (cfg_.method == Method::dbfgs) {
    for (int i = 0; i < graph.num_nodes(); ++i) {
      idx_.push_back(neighborhood_index(graph, i, prob.dim()));
      curv_.emplace_back(idx_.back(), cfg_.gamma, cfg_.big_gamma, cfg_.initial_scale);
    }
  }
  check_finite();
}

long SyncEngine::skips() const {
  long s = 0;
  for (const auto& c : curv_) s += c.skip_count();
  return s;
}

void SyncEngine::refresh_primal_and_gradient() {
  state_.x = all_maximizers(prob_, graph_, state_.lambda);
  state_.g = dual_gradient(graph_, state_.x);
}

void SyncEngine::step() {
  if (cfg_.method == Method::dbfgs)
    step_dbfgs();
  else
    step_dual_descent();
  ++t_;
  check_finite();
}

void SyncEngine::step_dbfgs() {
  const int n = graph_.num_nodes();
  const int p = prob_.dim();
  const long m = graph_.num_edges();

  // local neighborhood directions from B^i(t), g_{n_i}(t)
  std::vector<std::vector<DirectionBlock>> parts(n);
  for (int i = 0; i < n; ++i)
    parts[i] = split_direction(idx_[i], curv_[i].descent_direction(
                                            gather_neighborhood(graph_, idx_[i], state_.g)));

  // round 1: e^i_j to neighbors; d_i = e^i_i + sum_j e^j_i
  Vec d(state_.lambda.size());
  for (int i = 0; i < n; ++i) {
    std::vector<Vec> received;
    for (int j : graph_.neighbors(i)) {
      // i sits at position (rank of i among n_j) + 1 in j's block order
      const auto nb = graph_.neighbors(j);
      const auto k = static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), i) - nb.begin()) + 1;
      received.push_back(parts[j][k].block);
    }
    d.segment(static_cast<Index>(graph_.edge_offset(i)) * p, static_cast<Index>(graph_.degree(i)) * p) =
        assemble_direction(parts[i][0].block, received);
  }

  // round 2: lambda_i(t+1); round 3: x_i; round 4: g_i
  const Vec lambda_old = state_.lambda;
  const Vec g_old = state_.g;
  for (int i = 0; i < n; ++i) {
    const Index off = static_cast<Index>(graph_.edge_offset(i)) * p;
    const Index len = static_cast<Index>(graph_.degree(i)) * p;
    state_.lambda.segment(off, len) += cfg_.stepsize * d.segment(off, len);
  }
  refresh_primal_and_gradient();
  last_direction_ = std::move(d);

  for (int i = 0; i < n; ++i) {
    VariationPair pair = neighborhood_variations(
        curv_[i].normalization(), gather_neighborhood(graph_, idx_[i], lambda_old),
        gather_neighborhood(graph_, idx_[i], state_.lambda),
        gather_neighborhood(graph_, idx_[i], g_old),
        gather_neighborhood(graph_, idx_[i], state_.g), cfg_.gamma);
    curv_[i].update(pair);
  }
  comm_rounds_ += 4;
  comm_msgs_ += 4 * m;
}

void SyncEngine::step_dual_descent() {
  // node-local: lambda_i -= eps g_i; round 1: lambda_i; round 2: x_i
  state_.lambda -= cfg_.stepsize * state_.g;
  refresh_primal_and_gradient();
  comm_rounds_ += 2;
  comm_msgs_ += 2 * static_cast<long>(graph_.num_edges());
}

void SyncEngine::check_finite() const {
  if (!state_.lambda.allFinite() || !state_.g.allFinite() || !state_.x.allFinite())
    throw DivergenceError("non-finite iterate; stepsize too large?", t_);
}

std::optional<Vec> reference_optimum(const ProblemInstance& prob) {
  if (!prob.all_quadratic()) return std::nullopt;
  Vec xs = exact_optimum(prob);
  if (xs.squaredNorm() == 0.0) return std::nullopt;
  return xs;
}

IterationRecord observe_state(const ProblemInstance& prob, const DualState& s,
                              const std::optional<Vec>& x_star) {
  IterationRecord r;
  double h = 0.0;
  for (int i = 0; i < prob.num_nodes(); ++i) h += prob.objective(i).value(s.x.col(i));
  r.h = h + s.lambda.dot(s.g);
  r.grad_norm = s.g.norm();
  r.err = x_star ? normalized_error(s.x, *x_star) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

IterationRecord SyncEngine::record() const {
  IterationRecord r = observe_state(prob_, state_, x_star_);
  r.t = t_;
  r.comm_rounds = comm_rounds_;
  r.comm_msgs = comm_msgs_;
  r.skips = skips();
  if (!std::isfinite(r.h)) throw DivergenceError("non-finite dual value", t_);
  return r;
}

Trace run(const SyncRunConfig& config, const ProblemInstance& prob, const Graph& graph) {
  SyncEngine engine(config, prob, graph);
  Trace trace;
  trace.reserve(config.max_iters + 1);
  trace.push_back(engine.record());
  auto done = [&] { return config.threshold && trace.back().err <= *config.threshold; };
  while (!done() && engine.iteration() < config.max_iters) {
    engine.step();
    trace.push_back(engine.record());
  }
  return trace;
}

}  // namespace dbfgs
