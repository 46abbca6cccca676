#include <doctest.h>

#include "dbfgs/topology.hpp"

#include <algorithm>
#include <set>

using namespace dbfgs;

namespace {

Mat dense(const Eigen::SparseMatrix<double>& s) { return Mat(s); }

}  // namespace

TEST_CASE("regular_cycle neighbors") {
  auto nb = [](const Graph& g, int i) {
    return std::vector<int>(g.neighbors(i).begin(), g.neighbors(i).end());
  };
  CHECK(nb(regular_cycle(6, 2), 0) == std::vector<int>{1, 5});
  CHECK(nb(regular_cycle(6, 4), 0) == std::vector<int>{1, 2, 4, 5});

  Graph g = regular_cycle(50, 4);
  CHECK(g.num_nodes() == 50);
  CHECK(g.num_edges() == 200);
  for (int i = 0; i < 50; ++i) CHECK(g.degree(i) == 4);
}

TEST_CASE("regular_cycle rejects bad degrees") {
  CHECK_THROWS_AS(regular_cycle(6, 3), ConfigError);
  CHECK_THROWS_AS(regular_cycle(6, 6), ConfigError);
  CHECK_THROWS_AS(regular_cycle(6, 0), ConfigError);
}

TEST_CASE("graph construction validates input") {
  CHECK_THROWS_AS(Graph(3, {{0, 0}, {1, 2}}), ConfigError);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}, {1, 2}}), ConfigError);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), ConfigError);
  CHECK_THROWS_AS(Graph(4, {{0, 1}, {2, 3}}), ConfigError);
  CHECK_THROWS_AS(Graph(1, {}), ConfigError);
}

TEST_CASE("edge ordering is by source then ascending target") {
  Graph g = path_graph(3);
  const auto& e = g.directed_edges();
  REQUIRE(e.size() == 4);
  CHECK(e[0] == std::pair{0, 1});
  CHECK(e[1] == std::pair{1, 0});
  CHECK(e[2] == std::pair{1, 2});
  CHECK(e[3] == std::pair{2, 1});
  CHECK(g.edge_offset(1) == 1);
  CHECK(g.edge_index(1, 2) == 2);
  CHECK_THROWS(g.edge_index(0, 2));
}

TEST_CASE("random graphs are symmetric, loop-free, ascending") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = random_connected_graph(12, 0.2, seed);
    std::set<std::pair<int, int>> edges(g.directed_edges().begin(), g.directed_edges().end());
    long sum_deg = 0;
    for (const auto& [i, j] : edges) {
      CHECK(i != j);
      CHECK(edges.count({j, i}) == 1);
    }
    for (int i = 0; i < g.num_nodes(); ++i) {
      auto nb = g.neighbors(i);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
      sum_deg += g.degree(i);
    }
    CHECK(sum_deg == g.num_edges());
  }
}

TEST_CASE("incidence operator on the 3-node path") {
  Graph g = path_graph(3);
  Mat a = dense(incidence_operator(g, 1));
  Vec x(3);
  x << 5.0, 2.0, -1.0;
  CHECK((a * x)(0) == 3.0);

  Mat expect(3, 3);
  expect << 2, -2, 0, -2, 4, -2, 0, -2, 2;
  CHECK((a.transpose() * a - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("incidence operator identities on random graphs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int p = 1 + static_cast<int>(seed % 3);
    Graph g = random_connected_graph(9, 0.3, seed);
    Mat a = dense(incidence_operator(g, p));
    Mat lap = dense(laplacian(g, p));
    CHECK((a.transpose() * a - 2.0 * lap).cwiseAbs().maxCoeff() == 0.0);
    Vec v = Vec::LinSpaced(p, 1.0, 2.0);
    Vec ones = v.replicate(g.num_nodes(), 1);
    CHECK((a * ones).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("neighborhood index on the 3-node path") {
  Graph g = path_graph(3);
  NeighborhoodIndex mid = neighborhood_index(g, 1, 1);
  CHECK(mid.block_order == std::vector<int>{1, 0, 2});
  CHECK(mid.total_blocks == 4);
  CHECK(mid.offsets == std::vector<Index>{0, 2, 3, 4});

  NeighborhoodIndex end = neighborhood_index(g, 0, 1);
  CHECK(end.block_order == std::vector<int>{0, 1});
  CHECK(end.total_blocks == 3);

  Vec dmid = normalization_matrix(mid).diagonal();
  CHECK(dmid(0) == doctest::Approx(1.0 / 3));
  CHECK(dmid(1) == doctest::Approx(1.0 / 3));
  CHECK(dmid(2) == doctest::Approx(0.5));
  CHECK(dmid(3) == doctest::Approx(0.5));

  Vec dend = normalization_matrix(end).diagonal();
  CHECK(dend(0) == doctest::Approx(0.5));
  CHECK(dend(1) == doctest::Approx(1.0 / 3));
  CHECK(dend(2) == doctest::Approx(1.0 / 3));
}

TEST_CASE("neighborhood sizes on the 4-regular cycle") {
  Graph g = regular_cycle(50, 4);
  for (int i = 0; i < 50; ++i) {
    NeighborhoodIndex idx = neighborhood_index(g, i, 4);
    CHECK(idx.total_blocks == 20);
    CHECK(idx.offsets.back() == 80);
    Vec d = normalization_matrix(idx).diagonal();
    CHECK((d.array() - 0.2).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("neighborhood bookkeeping identity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = random_connected_graph(10, 0.25, seed);
    long total = 0, expect = g.num_edges();
    for (int i = 0; i < g.num_nodes(); ++i) {
      total += neighborhood_index(g, i, 2).total_blocks;
      for (int j : g.neighbors(i)) expect += g.degree(j);
    }
    CHECK(total == expect);
  }
}

TEST_CASE("gather and scatter are adjoint") {
  Graph g = random_connected_graph(8, 0.3, 4);
  const int p = 2;
  Vec global = Vec::LinSpaced(g.num_edges() * p, 0.0, 1.0);
  for (int i = 0; i < g.num_nodes(); ++i) {
    NeighborhoodIndex idx = neighborhood_index(g, i, p);
    Vec local = gather_neighborhood(g, idx, global);
    REQUIRE(local.size() == idx.dim());
    CHECK(local.segment(0, g.degree(i) * p) ==
          global.segment(g.edge_offset(i) * p, g.degree(i) * p));
    Vec acc = Vec::Zero(global.size());
    scatter_add_neighborhood(g, idx, local, acc);
    CHECK(acc.dot(global) == doctest::Approx(local.squaredNorm()));
  }
}
