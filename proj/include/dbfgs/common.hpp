#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dbfgs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Per-node primal copies, one column per node (p x n).
using PrimalBlock = Eigen::MatrixXd;

enum class Method { dbfgs, dual_descent };

const char* method_name(Method m);
Method parse_method(const std::string& s);

/// A precondition on user-supplied input was violated.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterate became non-finite; the run cannot continue.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dbfgs
