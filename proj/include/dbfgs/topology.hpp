#pragma once

#include "dbfgs/common.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dbfgs {

/// Static, symmetric, connected communication graph.
///
/// Directed edges are ordered by source node, then by ascending target, so the
/// multipliers of node i occupy one contiguous run of the global dual vector:
/// lambda = [lambda_1; ...; lambda_n] with lambda_i = [lambda_ij]_{j in n_i}.
class Graph {
 public:
  /// Builds from undirected edges; both orientations are implied. Rejects
  /// self-loops, out-of-range ids, duplicates and disconnected graphs.
  Graph(int n, const std::vector<std::pair<int, int>>& undirected_edges);

  int num_nodes() const { return static_cast<int>(neighbors_.size()); }
  /// Number of directed edges m (twice the undirected count).
  int num_edges() const { return static_cast<int>(edges_.size()); }

  std::span<const int> neighbors(int i) const { return neighbors_[check(i)]; }
  int degree(int i) const { return static_cast<int>(neighbors_[check(i)].size()); }

  const std::vector<std::pair<int, int>>& directed_edges() const { return edges_; }
  std::vector<std::pair<int, int>> undirected_edges() const;

  /// Position of the first edge (i, *) in the directed edge order.
  int edge_offset(int i) const { return offsets_[check(i)]; }
  /// Position of directed edge (i, j); throws if i and j are not adjacent.
  int edge_index(int i, int j) const;
  bool adjacent(int i, int j) const;

 private:
  int check(int i) const;

  std::vector<std::vector<int>> neighbors_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> offsets_;
};

/// Ring lattice: node i linked to the k/2 nearest nodes on each side.
Graph regular_cycle(int n, int k);

Graph path_graph(int n);

/// Random spanning tree plus each remaining pair with probability extra_prob.
Graph random_connected_graph(int n, double extra_prob, std::uint64_t seed);

/// Oriented incidence operator A, (m p) x (n p): the row block of edge (i, j)
/// maps x to x_i - x_j.
Eigen::SparseMatrix<double> incidence_operator(const Graph& g, int p);

/// Graph Laplacian kron I_p.
Eigen::SparseMatrix<double> laplacian(const Graph& g, int p);

/// Layout of a node's neighborhood vector: the owner's multiplier block first,
/// then each neighbor's block in ascending id order.
struct NeighborhoodIndex {
  int owner = 0;
  int p = 1;
  std::vector<int> block_order;
  /// Degree m_j of each node in block_order.
  std::vector<int> block_degrees;
  /// Scalar offset of each block; offsets.back() == total_blocks * p.
  std::vector<Index> offsets;
  /// M_i = m_i + sum of neighbor degrees.
  int total_blocks = 0;

  Index dim() const { return static_cast<Index>(total_blocks) * p; }
  Index block_size(std::size_t k) const { return offsets[k + 1] - offsets[k]; }
};

NeighborhoodIndex neighborhood_index(const Graph& g, int i, int p);

/// Diagonal D with entries 1/(m_j + 1) on node j's block.
Eigen::DiagonalMatrix<double, Eigen::Dynamic> normalization_matrix(const NeighborhoodIndex& idx);

/// Copies the blocks named by idx out of a global (m p) edge vector.
Vec gather_neighborhood(const Graph& g, const NeighborhoodIndex& idx, const Vec& global);

/// Adds a neighborhood vector back into its positions in a global edge vector.
void scatter_add_neighborhood(const Graph& g, const NeighborhoodIndex& idx, const Vec& local,
                              Vec& global);

}  // namespace dbfgs
