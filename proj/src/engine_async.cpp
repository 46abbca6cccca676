#include "dbfgs/engine_async.hpp"

#include "dbfgs/engine_sync.hpp"

#include <algorithm>
#include <cmath>

namespace dbfgs {

const char* variant_name(AsyncVariant v) {
  return v == AsyncVariant::phased ? "phased" : "single";
}

AsyncVariant parse_variant(const std::string& s) {
  if (s == "single" || s == "single_exchange") return AsyncVariant::single_exchange;
  if (s == "phased") return AsyncVariant::phased;
  throw ConfigError("async_variant: unknown value '" + s + "' (expected single or phased)");
}

int phases_per_iteration(Method m) { return m == Method::dbfgs ? 4 : 2; }

void AsyncRunConfig::validate() const {
  if (!(stepsize > 0.0) || !std::isfinite(stepsize)) throw ConfigError("eps: must be positive");
  if (!(gamma > 0.0)) throw ConfigError("gamma: must be positive");
  if (!(big_gamma > 0.0)) throw ConfigError("Gamma: must be positive");
  if (!(initial_scale >= gamma)) throw ConfigError("init_scale: must be >= gamma");
  if (threshold && !(*threshold > 0.0)) throw ConfigError("threshold: must be positive");
  if (max_ticks < 1) throw ConfigError("max_ticks: must be >= 1");
}

AsyncEngine::AsyncEngine(AsyncRunConfig config, const ProblemInstance& prob, const Graph& graph,
                         const Schedule& schedule, std::optional<Vec> x_star)
    : cfg_(std::move(config)),
      prob_(prob),
      graph_(graph),
      schedule_(schedule),
      x_star_(std::move(x_star)) {
  cfg_.validate();
  if (prob.num_nodes() != graph.num_nodes() || schedule.num_nodes() != graph.num_nodes())
    throw ConfigError("problem, graph and schedule disagree on the node count");
  if (cfg_.max_ticks > schedule.horizon())
    throw ConfigError("max_ticks: exceeds the schedule horizon");
  if (!x_star_) x_star_ = reference_optimum(prob);

  const int n = graph.num_nodes(), p = prob.dim();
  // Initial exchange: lambda(0) = 0 and exact x, g known to every neighbor.
  const DualState init =
      make_dual_state(prob, graph, Vec::Zero(static_cast<Index>(graph.num_edges()) * p));
  nodes_.resize(n);
  inbox_.resize(n);
  for (int i = 0; i < n; ++i) {
    NodeState& s = nodes_[i];
    const Index off = static_cast<Index>(graph.edge_offset(i)) * p;
    const Index len = static_cast<Index>(graph.degree(i)) * p;
    s.lambda = init.lambda.segment(off, len);
    s.x = init.x.col(i);
    s.g = init.g.segment(off, len);
    for (int j : graph.neighbors(i)) {
      const Index joff = static_cast<Index>(graph.edge_offset(j)) * p;
      const Index jlen = static_cast<Index>(graph.degree(j)) * p;
      s.view_lambda.push_back(init.lambda.segment(joff, jlen));
      s.view_x.push_back(init.x.col(j));
      s.view_g.push_back(init.g.segment(joff, jlen));
      s.view_stamp.push_back(0);
    }
    s.received_e.resize(graph.degree(i));
    s.idx = neighborhood_index(graph, i, p);
  }
  if (cfg_.method == Method::dbfgs) {
    // Initial descent components computed from B(0) and exchanged up front.
    std::vector<std::vector<DirectionBlock>> parts(n);
    for (int i = 0; i < n; ++i) {
      NodeState& s = nodes_[i];
      s.curv.emplace(s.idx, cfg_.gamma, cfg_.big_gamma, cfg_.initial_scale);
      s.snap_lambda = neighborhood_lambda(s);
      s.snap_g = neighborhood_gradient(s);
      parts[i] = split_direction(s.idx, s.curv->descent_direction(s.snap_g));
      s.pending_own_e = parts[i][0].block;
    }
    for (int i = 0; i < n; ++i) {
      const auto nb = graph.neighbors(i);
      for (std::size_t k = 0; k < nb.size(); ++k)
        nodes_[i].received_e[k].push_back(parts[nb[k]][rank_of(nb[k], i) + 1].block);
    }
  }
}

int AsyncEngine::rank_of(int i, int j) const {
  const auto nb = graph_.neighbors(i);
  return static_cast<int>(std::lower_bound(nb.begin(), nb.end(), j) - nb.begin());
}

Vec AsyncEngine::neighborhood_lambda(const NodeState& s) const {
  Vec out(s.idx.dim());
  out.segment(0, s.idx.block_size(0)) = s.lambda;
  for (std::size_t k = 0; k < s.view_lambda.size(); ++k)
    out.segment(s.idx.offsets[k + 1], s.idx.block_size(k + 1)) = s.view_lambda[k];
  return out;
}

Vec AsyncEngine::neighborhood_gradient(const NodeState& s) const {
  Vec out(s.idx.dim());
  out.segment(0, s.idx.block_size(0)) = s.g;
  for (std::size_t k = 0; k < s.view_g.size(); ++k)
    out.segment(s.idx.offsets[k + 1], s.idx.block_size(k + 1)) = s.view_g[k];
  return out;
}

void AsyncEngine::check_views() {
  const int bound = schedule_.staleness_bound();
  const long lo = std::max(0L, t_ - bound + 1);
  for (int i = 0; i < graph_.num_nodes(); ++i) {
    const auto nb = graph_.neighbors(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const long stamp = nodes_[i].view_stamp[k];
      if (t_ >= 1 && stamp != schedule_.pi_neighbor(i, nb[k], t_))
        throw std::logic_error("async: view of node " + std::to_string(nb[k]) + " at node " +
                               std::to_string(i) + " does not match pi_neighbor");
      if (bound > 0 && (stamp < lo || stamp > t_))
        throw StalenessViolation("async: node " + std::to_string(i) + " view of node " +
                                 std::to_string(nb[k]) + " is stale at tick " +
                                 std::to_string(t_));
      max_staleness_ = std::max(max_staleness_, t_ - stamp);
    }
  }
}

void AsyncEngine::drain(int i) {
  auto& box = inbox_[i];
  auto ready = std::stable_partition(box.begin(), box.end(),
                                     [&](const Bundle& b) { return b.sent_at < t_; });
  std::stable_sort(box.begin(), ready, [](const Bundle& a, const Bundle& b) {
    return a.sender != b.sender ? a.sender < b.sender : a.sent_at < b.sent_at;
  });
  NodeState& s = nodes_[i];
  for (auto it = box.begin(); it != ready; ++it) {
    const int k = rank_of(i, it->sender);
    s.view_lambda[k] = std::move(it->lambda);
    s.view_x[k] = std::move(it->x);
    s.view_g[k] = std::move(it->g);
    s.view_stamp[k] = it->sent_at;
    if (it->e) s.received_e[k].push_back(std::move(*it->e));
    ++delivered_;
  }
  box.erase(box.begin(), ready);
}

void AsyncEngine::apply_direction(NodeState& s) {
  // d_i = e^i_i + sum of delivered e^j_i; undelivered components count as zero
  if (cfg_.method == Method::dbfgs) {
    std::vector<Vec> received;
    for (auto& list : s.received_e)
      for (auto& e : list) received.push_back(std::move(e));
    for (auto& list : s.received_e) list.clear();
    Vec own = s.pending_own_e ? *s.pending_own_e : Vec::Zero(s.lambda.size());
    s.pending_own_e.reset();
    s.last_received = static_cast<long>(received.size());
    if (received.empty() && own.isZero(0.0)) return;
    s.lambda += cfg_.stepsize * assemble_direction(own, received);
  } else {
    s.lambda -= cfg_.stepsize * s.g;
  }
}

void AsyncEngine::recover_primal(int i, NodeState& s) {
  const int p = prob_.dim();
  const auto nb = graph_.neighbors(i);
  Vec c = Vec::Zero(p);
  for (std::size_t k = 0; k < nb.size(); ++k) {
    const Index ji = static_cast<Index>(rank_of(nb[k], i)) * p;
    c += s.lambda.segment(static_cast<Index>(k) * p, p) - s.view_lambda[k].segment(ji, p);
  }
  s.x = prob_.objective(i).maximizer(c);
}

void AsyncEngine::refresh_gradient(int /*i*/, NodeState& s) {
  const Index p = prob_.dim();
  for (std::size_t k = 0; k < s.view_x.size(); ++k)
    s.g.segment(static_cast<Index>(k) * p, p) = s.x - s.view_x[k];
}

void AsyncEngine::curvature_and_direction(int i, NodeState& s) {
  Vec lam = neighborhood_lambda(s);
  Vec grad = neighborhood_gradient(s);
  s.curv->update(neighborhood_variations(s.curv->normalization(), s.snap_lambda, lam, s.snap_g,
                                         grad, cfg_.gamma));
  s.snap_lambda = std::move(lam);
  s.snap_g = std::move(grad);
  auto parts = split_direction(s.idx, s.curv->descent_direction(s.snap_g));
  s.pending_own_e = parts[0].block;
  send(i, s, &parts);
}

void AsyncEngine::send(int i, NodeState& s, const std::vector<DirectionBlock>* parts) {
  const auto nb = graph_.neighbors(i);
  for (std::size_t k = 0; k < nb.size(); ++k) {
    Bundle b{i, t_, s.lambda, s.x, s.g, std::nullopt};
    if (parts) b.e = (*parts)[k + 1].block;
    inbox_[nb[k]].push_back(std::move(b));
    ++sent_;
  }
}

void AsyncEngine::process(int i) {
  NodeState& s = nodes_[i];
  drain(i);
  const bool dbfgs = cfg_.method == Method::dbfgs;
  if (cfg_.variant == AsyncVariant::single_exchange) {
    if (dbfgs) {
      apply_direction(s);
      recover_primal(i, s);
      refresh_gradient(i, s);
      curvature_and_direction(i, s);
    } else {
      refresh_gradient(i, s);
      apply_direction(s);
      recover_primal(i, s);
      send(i, s, nullptr);
    }
    return;
  }
  const int phase = s.phase;
  s.phase = (s.phase + 1) % phases_per_iteration(cfg_.method);
  if (dbfgs) {
    switch (phase) {
      case 0: apply_direction(s); break;
      case 1: recover_primal(i, s); break;
      case 2: refresh_gradient(i, s); break;
      default: curvature_and_direction(i, s); return;
    }
  } else if (phase == 0) {
    refresh_gradient(i, s);
    apply_direction(s);
  } else {
    recover_primal(i, s);
  }
  send(i, s, nullptr);
}

void AsyncEngine::tick() {
  if (t_ >= cfg_.max_ticks) throw std::out_of_range("async: horizon reached");
  check_views();
  for (int i = 0; i < graph_.num_nodes(); ++i)
    if (schedule_.available(i, t_)) process(i);
  for (const auto& s : nodes_)
    if (!s.lambda.allFinite() || !s.x.allFinite() || !s.g.allFinite())
      throw DivergenceError("non-finite async iterate; stepsize too large?", t_);
  ++t_;
}

Vec AsyncEngine::global_lambda() const {
  const int p = prob_.dim();
  Vec out(static_cast<Index>(graph_.num_edges()) * p);
  for (int i = 0; i < graph_.num_nodes(); ++i)
    out.segment(static_cast<Index>(graph_.edge_offset(i)) * p, nodes_[i].lambda.size()) =
        nodes_[i].lambda;
  return out;
}

long AsyncEngine::skips() const {
  long total = 0;
  for (const auto& s : nodes_)
    if (s.curv) total += s.curv->skip_count();
  return total;
}

IterationRecord AsyncEngine::record() const {
  IterationRecord r = observe_state(prob_, make_dual_state(prob_, graph_, global_lambda()), x_star_);
  if (!std::isfinite(r.h)) throw DivergenceError("non-finite dual value", t_);
  r.t = t_;
  r.comm_msgs = sent_;
  r.delivered_msgs = delivered_;
  r.comm_rounds = static_cast<double>(delivered_) / graph_.num_edges();
  r.skips = skips();
  r.max_staleness = max_staleness_;
  return r;
}

Trace run_async(const AsyncRunConfig& config, const ProblemInstance& prob, const Graph& graph,
                const Schedule& schedule) {
  AsyncEngine engine(config, prob, graph, schedule);
  Trace trace;
  trace.push_back(engine.record());
  auto done = [&] { return config.threshold && trace.back().err <= *config.threshold; };
  while (!done() && engine.now() < config.max_ticks) {
    engine.tick();
    trace.push_back(engine.record());
  }
  return trace;
}

}  // namespace dbfgs
