#include "dbfgs/problem.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace dbfgs {

QuadraticObjective::QuadraticObjective(Vec diag, Vec b) : a_(std::move(diag)), b_(std::move(b)) {
  if (a_.size() == 0 || a_.size() != b_.size())
    throw ConfigError("quadratic: diagonal and linear term sizes differ");
  if (!(a_.array() > 0.0).all()) throw ConfigError("quadratic: diagonal must be strictly positive");
}

double QuadraticObjective::value(const Vec& x) const {
  return -0.5 * x.dot(a_.cwiseProduct(x)) - b_.dot(x);
}

Vec QuadraticObjective::gradient(const Vec& x) const { return -a_.cwiseProduct(x) - b_; }

Vec QuadraticObjective::maximizer(const Vec& c) const { return (c - b_).cwiseQuotient(a_); }

const char* regime_name(ConditionRegime r) {
  return r == ConditionRegime::split_1e2 ? "1e2" : "1e0";
}

ConditionRegime parse_regime(const std::string& s) {
  if (s == "1e2" || s == "100") return ConditionRegime::split_1e2;
  if (s == "1e0" || s == "1") return ConditionRegime::narrow_1e0;
  throw ConfigError("cond: unknown regime '" + s + "' (expected 1e2 or 1e0)");
}

ProblemInstance::ProblemInstance(int p, std::vector<std::shared_ptr<const NodeObjective>> objectives)
    : p_(p), objectives_(std::move(objectives)) {
  if (p_ < 1) throw ConfigError("problem: p must be >= 1");
  if (objectives_.size() < 2) throw ConfigError("problem: need at least 2 nodes");
  mu_ = std::numeric_limits<double>::infinity();
  for (const auto& f : objectives_) {
    if (!f || f->dim() != p_) throw ConfigError("problem: objective dimension mismatch");
    mu_ = std::min(mu_, f->strong_concavity());
  }
  if (!(mu_ > 0.0)) throw ConfigError("problem: strong concavity must be positive");
}

const QuadraticObjective* ProblemInstance::quadratic(int i) const {
  return dynamic_cast<const QuadraticObjective*>(objectives_.at(i).get());
}

bool ProblemInstance::all_quadratic() const {
  for (int i = 0; i < num_nodes(); ++i)
    if (!quadratic(i)) return false;
  return true;
}

ProblemInstance make_quadratic_instance(const std::vector<Vec>& diags, const std::vector<Vec>& bs) {
  if (diags.size() != bs.size()) throw ConfigError("problem: diag/b count mismatch");
  if (diags.empty()) throw ConfigError("problem: need at least 2 nodes");
  std::vector<std::shared_ptr<const NodeObjective>> objs;
  for (std::size_t i = 0; i < diags.size(); ++i)
    objs.push_back(std::make_shared<QuadraticObjective>(diags[i], bs[i]));
  return ProblemInstance(static_cast<int>(diags[0].size()), std::move(objs));
}

ProblemInstance generate_quadratic(int n, int p, std::uint64_t seed, ConditionRegime regime) {
  if (p < 2 || p % 2 != 0) throw ConfigError("p: must be even and >= 2");
  if (n < 2) throw ConfigError("n: must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> low(0.1, 1.0), high(1.0, 10.0),
      narrow(1.0, 1.0 + kWellConditionedWidth), unit(0.0, 1.0);
  std::vector<Vec> diags, bs;
  for (int i = 0; i < n; ++i) {
    Vec a(p), b(p);
    for (int k = 0; k < p; ++k) {
      if (regime == ConditionRegime::narrow_1e0)
        a[k] = narrow(rng);
      else
        a[k] = k < p / 2 ? low(rng) : high(rng);
    }
    for (int k = 0; k < p; ++k) b[k] = unit(rng);
    diags.push_back(std::move(a));
    bs.push_back(std::move(b));
  }
  ProblemInstance prob = make_quadratic_instance(diags, bs);
  prob.seed = seed;
  prob.regime = regime;
  return prob;
}

Vec quadratic_maximizer(const QuadraticObjective& obj, const Vec& c) { return obj.maximizer(c); }

Vec exact_optimum(const ProblemInstance& prob) {
  Vec a_sum = Vec::Zero(prob.dim()), b_sum = Vec::Zero(prob.dim());
  for (int i = 0; i < prob.num_nodes(); ++i) {
    const auto* q = prob.quadratic(i);
    if (!q) throw ConfigError("exact_optimum: node " + std::to_string(i) + " is not quadratic");
    a_sum += q->diag();
    b_sum += q->linear();
  }
  return -b_sum.cwiseQuotient(a_sum);
}

double aggregate_value(const ProblemInstance& prob, const Vec& x) {
  double v = 0.0;
  for (int i = 0; i < prob.num_nodes(); ++i) v += prob.objective(i).value(x);
  return v;
}

double aggregate_condition_number(const ProblemInstance& prob) {
  Vec a_sum = Vec::Zero(prob.dim());
  for (int i = 0; i < prob.num_nodes(); ++i) {
    const auto* q = prob.quadratic(i);
    if (!q) throw ConfigError("condition number: non-quadratic objective");
    a_sum += q->diag();
  }
  return a_sum.maxCoeff() / a_sum.minCoeff();
}

}  // namespace dbfgs
