#pragma once

#include "dbfgs/common.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dbfgs {

/// Local strongly concave objective f_i held by one node.
class NodeObjective {
 public:
  virtual ~NodeObjective() = default;

  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  /// argmax_x f(x) + c^T x.
  virtual Vec maximizer(const Vec& c) const = 0;
  virtual double strong_concavity() const = 0;
};

/// f(x) = -1/2 x^T diag(a) x - b^T x with every a_k > 0.
class QuadraticObjective final : public NodeObjective {
 public:
  QuadraticObjective(Vec diag, Vec b);

  int dim() const override { return static_cast<int>(a_.size()); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  /// diag(a)^{-1} (c - b).
  Vec maximizer(const Vec& c) const override;
  double strong_concavity() const override { return a_.minCoeff(); }

  const Vec& diag() const { return a_; }
  const Vec& linear() const { return b_; }

 private:
  Vec a_;
  Vec b_;
};

/// Diagonal spread of the generated quadratics.
enum class ConditionRegime {
  /// First p/2 entries in [0.1, 1], last p/2 in [1, 10].
  split_1e2,
  /// All entries in [1, 1 + well_conditioned_width].
  narrow_1e0,
};

const char* regime_name(ConditionRegime r);
ConditionRegime parse_regime(const std::string& s);

inline constexpr double kWellConditionedWidth = 0.1;

class ProblemInstance {
 public:
  ProblemInstance(int p, std::vector<std::shared_ptr<const NodeObjective>> objectives);

  int num_nodes() const { return static_cast<int>(objectives_.size()); }
  int dim() const { return p_; }
  /// Smallest strong concavity constant over all nodes.
  double mu() const { return mu_; }
  const NodeObjective& objective(int i) const { return *objectives_.at(i); }
  /// Null when node i is not quadratic.
  const QuadraticObjective* quadratic(int i) const;
  bool all_quadratic() const;

  /// Generator provenance, present for generated instances.
  std::optional<std::uint64_t> seed;
  std::optional<ConditionRegime> regime;

 private:
  int p_;
  std::vector<std::shared_ptr<const NodeObjective>> objectives_;
  double mu_;
};

/// Random diagonal quadratics; a pure function of its arguments.
///
/// Uses std::mt19937_64 seeded with `seed` and std::uniform_real_distribution;
/// per node, all diagonal entries are drawn first, then the b entries in [0, 1].
ProblemInstance generate_quadratic(int n, int p, std::uint64_t seed,
                                   ConditionRegime regime = ConditionRegime::split_1e2);

ProblemInstance make_quadratic_instance(const std::vector<Vec>& diags, const std::vector<Vec>& bs);

Vec quadratic_maximizer(const QuadraticObjective& obj, const Vec& c);

/// Maximizer of sum_i f_i: -(sum_i A_i)^{-1} sum_i b_i. Quadratic instances only.
Vec exact_optimum(const ProblemInstance& prob);

double aggregate_value(const ProblemInstance& prob, const Vec& x);

/// lambda_max / lambda_min of sum_i A_i.
double aggregate_condition_number(const ProblemInstance& prob);

}  // namespace dbfgs
