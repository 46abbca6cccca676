#include "dbfgs/metrics.hpp"

#include <stdexcept>

namespace dbfgs {

double normalized_error(const PrimalBlock& x, const Vec& x_star) {
  const double denom = x_star.squaredNorm();
  if (!(denom > 0.0))
    throw std::domain_error("normalized_error: optimum is zero; regenerate the instance");
  double acc = 0.0;
  for (Index i = 0; i < x.cols(); ++i) acc += (x.col(i) - x_star).squaredNorm();
  return acc / (static_cast<double>(x.cols()) * denom);
}

double primal_distance(const PrimalBlock& x, const Vec& x_star) {
  return (x.colwise() - x_star).norm();
}

std::optional<long> convergence_time(std::span<const double> errors, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("convergence_time: threshold must be > 0");
  for (std::size_t t = 0; t < errors.size(); ++t)
    if (errors[t] <= threshold) return static_cast<long>(t);
  return std::nullopt;
}

std::optional<long> convergence_time(const Trace& trace, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("convergence_time: threshold must be > 0");
  for (const auto& r : trace)
    if (r.err <= threshold) return r.t;
  return std::nullopt;
}

}  // namespace dbfgs
