#include "dbfgs/curvature.hpp"

namespace dbfgs {

Variations centralized_variations(const Vec& lambda_old, const Vec& lambda_new, const Vec& g_old,
                                  const Vec& g_new, double gamma) {
  Variations out;
  out.v = lambda_new - lambda_old;
  out.r_tilde = g_new - g_old - gamma * out.v;
  return out;
}

double curvature_threshold(const Vec& a, const Vec& b) {
  return 1e-10 * (1.0 + a.norm() * b.norm());
}

Mat regularized_bfgs_update(const Mat& b, const Vec& v, const Vec& r_tilde, double gamma) {
  const double rv = r_tilde.dot(v);
  if (!(rv > curvature_threshold(r_tilde, v)))
    throw CurvatureConditionError("regularized BFGS: r~^T v is not positive");
  const Vec bv = b * v;
  const double vbv = v.dot(bv);
  if (!(vbv > curvature_threshold(v, bv)))
    throw CurvatureConditionError("regularized BFGS: v^T B v is not positive");
  Mat out = b;
  out.noalias() += (r_tilde / rv) * r_tilde.transpose();
  out.noalias() -= (bv / vbv) * bv.transpose();
  out.diagonal().array() += gamma;
  // rounding in the rank-one terms leaves O(eps) asymmetry
  return 0.5 * (out + out.transpose());
}

VariationPair neighborhood_variations(const Eigen::DiagonalMatrix<double, Eigen::Dynamic>& d,
                                      const Vec& lambda_old, const Vec& lambda_new,
                                      const Vec& g_old, const Vec& g_new, double gamma) {
  if (lambda_old.size() != d.rows() || lambda_new.size() != d.rows() ||
      g_old.size() != d.rows() || g_new.size() != d.rows())
    throw std::invalid_argument("neighborhood_variations: dimension mismatch");
  VariationPair pair;
  pair.v_tilde = d * (lambda_new - lambda_old);
  pair.r_tilde = g_new - g_old - gamma * pair.v_tilde;
  pair.curvature_ok =
      pair.r_tilde.dot(pair.v_tilde) > curvature_threshold(pair.r_tilde, pair.v_tilde);
  return pair;
}

NeighborhoodCurvature::NeighborhoodCurvature(NeighborhoodIndex idx, double gamma, double big_gamma,
                                             double initial_scale)
    : idx_(std::move(idx)),
      d_(normalization_matrix(idx_)),
      gamma_(gamma),
      big_gamma_(big_gamma),
      b_(initial_scale * Mat::Identity(idx_.dim(), idx_.dim())) {
  if (!(gamma > 0.0)) throw ConfigError("gamma: must be positive");
  if (!(big_gamma > 0.0)) throw ConfigError("Gamma: must be positive");
  if (!(initial_scale >= gamma))
    throw ConfigError("initial curvature scale must be >= gamma");
  refactor();
}

void NeighborhoodCurvature::refactor() {
  llt_.compute(b_);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("curvature: B lost positive definiteness");
}

bool NeighborhoodCurvature::update(const VariationPair& pair) {
  if (!pair.curvature_ok) {
    ++skips_;
    return false;
  }
  try {
    b_ = regularized_bfgs_update(b_, pair.v_tilde, pair.r_tilde, gamma_);
  } catch (const CurvatureConditionError&) {
    ++skips_;
    return false;
  }
  refactor();
  return true;
}

Vec NeighborhoodCurvature::descent_direction(const Vec& g_nbhd) const {
  if (g_nbhd.size() != idx_.dim())
    throw std::invalid_argument("descent_direction: gradient has wrong size");
  Vec e = llt_.solve(g_nbhd);
  e.noalias() += big_gamma_ * (d_ * g_nbhd);
  return -e;
}

Mat NeighborhoodCurvature::inverse() const {
  return llt_.solve(Mat::Identity(idx_.dim(), idx_.dim()));
}

NeighborhoodCurvature dbfgs_update(NeighborhoodCurvature state, const VariationPair& pair) {
  state.update(pair);
  return state;
}

std::vector<DirectionBlock> split_direction(const NeighborhoodIndex& idx, const Vec& e) {
  if (e.size() != idx.dim()) throw std::invalid_argument("split_direction: wrong size");
  std::vector<DirectionBlock> out;
  out.reserve(idx.block_order.size());
  for (std::size_t k = 0; k < idx.block_order.size(); ++k)
    out.push_back({idx.block_order[k], e.segment(idx.offsets[k], idx.block_size(k))});
  return out;
}

Vec assemble_direction(const Vec& own_block, std::span<const Vec> received) {
  Vec d = own_block;
  for (const Vec& r : received) {
    if (r.size() != d.size()) throw std::invalid_argument("assemble_direction: block size mismatch");
    d += r;
  }
  return d;
}

Mat global_inverse_approximation(const Graph& g, std::span<const NeighborhoodCurvature> states) {
  if (states.empty()) throw std::invalid_argument("global_inverse_approximation: no states");
  const int p = states.front().index().p;
  const Index dim = static_cast<Index>(g.num_edges()) * p;
  Mat h = Mat::Zero(dim, dim);
  for (const auto& st : states) {
    const auto& idx = st.index();
    Mat local = st.inverse();
    local.diagonal() += st.big_gamma() * st.normalization().diagonal();
    std::vector<Index> pos(idx.dim());
    for (std::size_t k = 0; k < idx.block_order.size(); ++k) {
      Index base = static_cast<Index>(g.edge_offset(idx.block_order[k])) * p;
      for (Index q = 0; q < idx.block_size(k); ++q) pos[idx.offsets[k] + q] = base + q;
    }
    for (Index r = 0; r < idx.dim(); ++r)
      for (Index c = 0; c < idx.dim(); ++c) h(pos[r], pos[c]) += local(r, c);
  }
  return h;
}

Vec global_direction_oracle(const Graph& g, std::span<const NeighborhoodCurvature> states,
                            const Vec& g_global) {
  return -(global_inverse_approximation(g, states) * g_global);
}

double inverse_approximation_bound(int n, double gamma, double big_gamma) {
  return big_gamma + n / gamma;
}

double max_stable_stepsize(double mu, int n, double gamma, double big_gamma) {
  if (!(mu > 0) || n < 1 || !(gamma > 0) || !(big_gamma > 0))
    throw ConfigError("max_stable_stepsize: inputs must be positive");
  const double delta = inverse_approximation_bound(n, gamma, big_gamma);
  return big_gamma * mu / (n * delta * delta);
}

}  // namespace dbfgs
