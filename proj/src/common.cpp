#include "dbfgs/common.hpp"

namespace dbfgs {

const char* method_name(Method m) {
  switch (m) {
    case Method::dbfgs:
      return "dbfgs";
    case Method::dual_descent:
      return "dd";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "dbfgs" || s == "d-bfgs") return Method::dbfgs;
  if (s == "dd" || s == "dual_descent") return Method::dual_descent;
  throw ConfigError("method: unknown value '" + s + "' (expected dbfgs or dd)");
}

}  // namespace dbfgs
