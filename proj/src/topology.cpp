#include "dbfgs/topology.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace dbfgs {

Graph::Graph(int n, const std::vector<std::pair<int, int>>& undirected_edges) {
  if (n < 2) throw ConfigError("graph: need at least 2 nodes");
  std::vector<std::set<int>> adj(n);
  for (auto [a, b] : undirected_edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw ConfigError("graph: edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ") out of range");
    if (a == b) throw ConfigError("graph: self-loop at node " + std::to_string(a));
    if (!adj[a].insert(b).second)
      throw ConfigError("graph: duplicate edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ")");
    adj[b].insert(a);
  }

  neighbors_.resize(n);
  offsets_.resize(n + 1);
  for (int i = 0; i < n; ++i) {
    neighbors_[i].assign(adj[i].begin(), adj[i].end());
    offsets_[i] = static_cast<int>(edges_.size());
    for (int j : neighbors_[i]) edges_.emplace_back(i, j);
  }
  offsets_[n] = static_cast<int>(edges_.size());

  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : neighbors_[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  if (reached != n) throw ConfigError("graph: not connected");
}

int Graph::check(int i) const {
  if (i < 0 || i >= num_nodes()) throw std::out_of_range("graph: node id " + std::to_string(i));
  return i;
}

std::vector<std::pair<int, int>> Graph::undirected_edges() const {
  std::vector<std::pair<int, int>> out;
  for (auto [i, j] : edges_)
    if (i < j) out.emplace_back(i, j);
  return out;
}

bool Graph::adjacent(int i, int j) const {
  const auto& nb = neighbors_[check(i)];
  return std::binary_search(nb.begin(), nb.end(), j);
}

int Graph::edge_index(int i, int j) const {
  const auto& nb = neighbors_[check(i)];
  auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j)
    throw std::out_of_range("graph: no edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
  return offsets_[i] + static_cast<int>(it - nb.begin());
}

Graph regular_cycle(int n, int k) {
  if (k % 2 != 0) throw ConfigError("regular_cycle: degree must be even");
  if (k < 2 || k >= n) throw ConfigError("regular_cycle: need 2 <= degree < n");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int s = 1; s <= k / 2; ++s) {
      edges.emplace_back(i, (i + s) % n);
    }
  return Graph(n, edges);
}

Graph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, edges);
}

Graph random_connected_graph(int n, double extra_prob, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<int, int>> edges;
  for (int k = 1; k < n; ++k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    int a = order[k], b = order[pick(rng)];
    edges.emplace(std::min(a, b), std::max(a, b));
  }
  std::bernoulli_distribution coin(extra_prob);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!edges.count({a, b}) && coin(rng)) edges.emplace(a, b);
  return Graph(n, {edges.begin(), edges.end()});
}

Eigen::SparseMatrix<double> incidence_operator(const Graph& g, int p) {
  std::vector<Eigen::Triplet<double>> trip;
  const auto& edges = g.directed_edges();
  trip.reserve(edges.size() * 2 * p);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [i, j] = edges[e];
    for (int k = 0; k < p; ++k) {
      trip.emplace_back(e * p + k, i * p + k, 1.0);
      trip.emplace_back(e * p + k, j * p + k, -1.0);
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<Index>(edges.size()) * p,
                                static_cast<Index>(g.num_nodes()) * p);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

Eigen::SparseMatrix<double> laplacian(const Graph& g, int p) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < g.num_nodes(); ++i) {
    for (int k = 0; k < p; ++k) trip.emplace_back(i * p + k, i * p + k, g.degree(i));
    for (int j : g.neighbors(i))
      for (int k = 0; k < p; ++k) trip.emplace_back(i * p + k, j * p + k, -1.0);
  }
  Index dim = static_cast<Index>(g.num_nodes()) * p;
  Eigen::SparseMatrix<double> l(dim, dim);
  l.setFromTriplets(trip.begin(), trip.end());
  return l;
}

NeighborhoodIndex neighborhood_index(const Graph& g, int i, int p) {
  NeighborhoodIndex idx;
  idx.owner = i;
  idx.p = p;
  idx.block_order.push_back(i);
  for (int j : g.neighbors(i)) idx.block_order.push_back(j);
  idx.offsets.push_back(0);
  for (int j : idx.block_order) {
    idx.block_degrees.push_back(g.degree(j));
    idx.total_blocks += g.degree(j);
    idx.offsets.push_back(idx.offsets.back() + static_cast<Index>(g.degree(j)) * p);
  }
  return idx;
}

Eigen::DiagonalMatrix<double, Eigen::Dynamic> normalization_matrix(const NeighborhoodIndex& idx) {
  Vec diag(idx.dim());
  for (std::size_t k = 0; k < idx.block_order.size(); ++k)
    diag.segment(idx.offsets[k], idx.block_size(k))
        .setConstant(1.0 / (idx.block_degrees[k] + 1.0));
  return Eigen::DiagonalMatrix<double, Eigen::Dynamic>(diag);
}

Vec gather_neighborhood(const Graph& g, const NeighborhoodIndex& idx, const Vec& global) {
  Vec out(idx.dim());
  for (std::size_t k = 0; k < idx.block_order.size(); ++k) {
    Index src = static_cast<Index>(g.edge_offset(idx.block_order[k])) * idx.p;
    out.segment(idx.offsets[k], idx.block_size(k)) = global.segment(src, idx.block_size(k));
  }
  return out;
}

void scatter_add_neighborhood(const Graph& g, const NeighborhoodIndex& idx, const Vec& local,
                              Vec& global) {
  for (std::size_t k = 0; k < idx.block_order.size(); ++k) {
    Index dst = static_cast<Index>(g.edge_offset(idx.block_order[k])) * idx.p;
    global.segment(dst, idx.block_size(k)) += local.segment(idx.offsets[k], idx.block_size(k));
  }
}

}  // namespace dbfgs
