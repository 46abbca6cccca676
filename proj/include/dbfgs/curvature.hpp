#pragma once

#include "dbfgs/topology.hpp"

#include <span>
#include <vector>

namespace dbfgs {

/// Variation pair of the centralized regularized BFGS update.
struct Variations {
  Vec v;        // lambda_new - lambda_old
  Vec r_tilde;  // g_new - g_old - gamma v
};

Variations centralized_variations(const Vec& lambda_old, const Vec& lambda_new, const Vec& g_old,
                                  const Vec& g_new, double gamma);

/// Threshold below which an inner product counts as non-positive:
/// 1e-10 (1 + |a| |b|).
double curvature_threshold(const Vec& a, const Vec& b);

/// Thrown when r~^T v or v^T B v falls below curvature_threshold.
class CurvatureConditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// B + r r^T/(r^T v) - B v v^T B/(v^T B v) + gamma I, which satisfies
/// B' v = r + gamma v. Throws CurvatureConditionError when either
/// denominator fails the threshold.
Mat regularized_bfgs_update(const Mat& b, const Vec& v, const Vec& r_tilde, double gamma);

struct VariationPair {
  Vec v_tilde;
  Vec r_tilde;
  bool curvature_ok = false;
};

/// v~ = D (lambda_new - lambda_old), r~ = dg - gamma v~.
VariationPair neighborhood_variations(const Eigen::DiagonalMatrix<double, Eigen::Dynamic>& d,
                                      const Vec& lambda_old, const Vec& lambda_new,
                                      const Vec& g_old, const Vec& g_new, double gamma);

/// Per-node curvature matrix B^i over the neighborhood multipliers.
///
/// Keeps B symmetric with smallest eigenvalue >= gamma (given the initial
/// scale >= gamma) and caches its Cholesky factor for the descent solve.
class NeighborhoodCurvature {
 public:
  NeighborhoodCurvature(NeighborhoodIndex idx, double gamma, double big_gamma,
                        double initial_scale = 1.0);

  const NeighborhoodIndex& index() const { return idx_; }
  const Mat& matrix() const { return b_; }
  const Eigen::DiagonalMatrix<double, Eigen::Dynamic>& normalization() const { return d_; }
  double gamma() const { return gamma_; }
  double big_gamma() const { return big_gamma_; }
  long skip_count() const { return skips_; }

  /// Applies the regularized update when the pair passes both curvature
  /// guards; otherwise leaves B unchanged and counts a skip. Returns true
  /// when B changed.
  bool update(const VariationPair& pair);

  /// e = -(B^{-1} + Gamma D) g_nbhd.
  Vec descent_direction(const Vec& g_nbhd) const;

  /// B^{-1} formed explicitly; test oracles only.
  Mat inverse() const;

 private:
  void refactor();

  NeighborhoodIndex idx_;
  Eigen::DiagonalMatrix<double, Eigen::Dynamic> d_;
  double gamma_;
  double big_gamma_;
  Mat b_;
  Eigen::LLT<Mat> llt_;
  long skips_ = 0;
};

/// Value-semantics form of NeighborhoodCurvature::update.
NeighborhoodCurvature dbfgs_update(NeighborhoodCurvature state, const VariationPair& pair);

struct DirectionBlock {
  int node;
  Vec block;
};

/// Cuts a neighborhood direction into per-node blocks, in block order.
std::vector<DirectionBlock> split_direction(const NeighborhoodIndex& idx, const Vec& e);

/// d_i = e^i_i + sum of received e^j_i, added in the given order.
Vec assemble_direction(const Vec& own_block, std::span<const Vec> received);

/// sum_i [H^i + Gamma D^_i]: each B^{-1} + Gamma D embedded at its neighborhood
/// positions of the (m p) x (m p) global matrix. Equals H + Gamma I.
Mat global_inverse_approximation(const Graph& g, std::span<const NeighborhoodCurvature> states);

/// -(H + Gamma I) g for the full edge gradient g.
Vec global_direction_oracle(const Graph& g, std::span<const NeighborhoodCurvature> states,
                            const Vec& g_global);

/// Upper eigenvalue bound Gamma + n/gamma of H + Gamma I.
double inverse_approximation_bound(int n, double gamma, double big_gamma);

/// Gamma mu / (n Delta^2) with Delta = Gamma + n/gamma.
double max_stable_stepsize(double mu, int n, double gamma, double big_gamma);

}  // namespace dbfgs
