#include "dbfgs/dual_core.hpp"

namespace dbfgs {

Vec multiplier_coefficient(const Graph& g, const Vec& lambda, int i, int p) {
  if (lambda.size() != static_cast<Index>(g.num_edges()) * p)
    throw std::invalid_argument("multiplier_coefficient: lambda has wrong size");
  Vec c = Vec::Zero(p);
  for (int j : g.neighbors(i)) {
    Index ij = static_cast<Index>(g.edge_index(i, j)) * p;
    Index ji = static_cast<Index>(g.edge_index(j, i)) * p;
    c += lambda.segment(ij, p) - lambda.segment(ji, p);
  }
  return c;
}

Vec local_maximizer(const ProblemInstance& prob, const Graph& g, const Vec& lambda, int i) {
  return prob.objective(i).maximizer(multiplier_coefficient(g, lambda, i, prob.dim()));
}

PrimalBlock all_maximizers(const ProblemInstance& prob, const Graph& g, const Vec& lambda) {
  PrimalBlock x(prob.dim(), prob.num_nodes());
  for (int i = 0; i < prob.num_nodes(); ++i) x.col(i) = local_maximizer(prob, g, lambda, i);
  return x;
}

Vec dual_gradient(const Graph& g, const PrimalBlock& x) {
  const Index p = x.rows();
  Vec out(static_cast<Index>(g.num_edges()) * p);
  const auto& edges = g.directed_edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    out.segment(static_cast<Index>(e) * p, p) = x.col(edges[e].first) - x.col(edges[e].second);
  return out;
}

double dual_value(const ProblemInstance& prob, const Graph& g, const Vec& lambda) {
  PrimalBlock x = all_maximizers(prob, g, lambda);
  double h = 0.0;
  for (int i = 0; i < prob.num_nodes(); ++i) h += prob.objective(i).value(x.col(i));
  return h + lambda.dot(dual_gradient(g, x));
}

DualState make_dual_state(const ProblemInstance& prob, const Graph& g, Vec lambda) {
  DualState s;
  s.lambda = std::move(lambda);
  s.x = all_maximizers(prob, g, s.lambda);
  s.g = dual_gradient(g, s.x);
  return s;
}

Mat dual_hessian_oracle(const ProblemInstance& prob, const Graph& g, const Vec& /*lambda*/) {
  const int p = prob.dim(), n = prob.num_nodes();
  Vec inv_curv(static_cast<Index>(n) * p);
  for (int i = 0; i < n; ++i) {
    const auto* q = prob.quadratic(i);
    if (!q) throw ConfigError("dual_hessian_oracle: node " + std::to_string(i) + " is not quadratic");
    inv_curv.segment(static_cast<Index>(i) * p, p) = q->diag().cwiseInverse();
  }
  // dc/dlambda = A^T, dx/dc = K, dg/dx = A
  Eigen::SparseMatrix<double> a = incidence_operator(g, p);
  Mat dx_dlambda = inv_curv.asDiagonal() * Mat(a.transpose());
  return a * dx_dlambda;
}

double lipschitz_bound(const ProblemInstance& prob, const Graph& g) {
  return 4.0 * g.num_nodes() / prob.mu();
}

}  // namespace dbfgs
