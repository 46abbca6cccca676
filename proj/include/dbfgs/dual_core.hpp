#pragma once

#include "dbfgs/problem.hpp"
#include "dbfgs/topology.hpp"

namespace dbfgs {

/// Dual iterate with its Lagrangian maximizers and edge gradients.
struct DualState {
  Vec lambda;     // m p, ordered as Graph::directed_edges()
  PrimalBlock x;  // p x n
  Vec g;          // m p, g_ij = x_i - x_j
};

/// c_i = sum_{j in n_i} (lambda_ij - lambda_ji), accumulated in ascending j.
Vec multiplier_coefficient(const Graph& g, const Vec& lambda, int i, int p);

/// x_i(lambda) = argmax f_i(x) + c_i^T x.
Vec local_maximizer(const ProblemInstance& prob, const Graph& g, const Vec& lambda, int i);

PrimalBlock all_maximizers(const ProblemInstance& prob, const Graph& g, const Vec& lambda);

/// Constraint slack g_ij = x_i - x_j stacked over directed edges.
Vec dual_gradient(const Graph& g, const PrimalBlock& x);

/// h(lambda) = sum_i f_i(x_i) + sum_(i,j) lambda_ij^T (x_i - x_j) at x = x(lambda).
double dual_value(const ProblemInstance& prob, const Graph& g, const Vec& lambda);

DualState make_dual_state(const ProblemInstance& prob, const Graph& g, Vec lambda);

/// Exact Hessian of h for quadratic instances: A K A^T with K = blockdiag(A_i^{-1}),
/// formed by composing lambda -> c -> x -> g. Throws ConfigError otherwise.
Mat dual_hessian_oracle(const ProblemInstance& prob, const Graph& g, const Vec& lambda);

/// Lipschitz constant 4n/mu of the dual gradient.
double lipschitz_bound(const ProblemInstance& prob, const Graph& g);

}  // namespace dbfgs
