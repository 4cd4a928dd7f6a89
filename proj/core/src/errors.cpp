#include "specprec/errors.hpp"

#include <sstream>

namespace specprec {

ConfigError::ConfigError(std::string field, const std::string& what)
    : Error(field + ": " + what), field_(std::move(field)) {}

namespace {

std::string singularity_message(double pivot, double cond) {
  std::ostringstream os;
  os << "Gram matrix is numerically singular (smallest pivot " << pivot
     << ", condition estimate " << cond << ")";
  return os.str();
}

std::string level_message(std::size_t requested, std::size_t max_q, double tail) {
  std::ostringstream os;
  os << "preconditioner level q=" << requested << " is too deep: lambda_q=" << tail
     << " is below the admissibility floor; largest admissible q is " << max_q;
  return os.str();
}

}  // namespace

SingularityError::SingularityError(double smallest_pivot, double condition_estimate)
    : NumericalError(singularity_message(smallest_pivot, condition_estimate)),
      pivot_(smallest_pivot),
      cond_(condition_estimate) {}

NotPsdError::NotPsdError(double min_eigenvalue)
    : NumericalError("operator is not positive semidefinite (min eigenvalue " +
                     std::to_string(min_eigenvalue) + ")"),
      min_eig_(min_eigenvalue) {}

LevelTooDeepError::LevelTooDeepError(std::size_t requested, std::size_t max_admissible,
                                     double tail)
    : NumericalError(level_message(requested, max_admissible, tail)),
      requested_(requested),
      max_admissible_(max_admissible) {}

}  // namespace specprec
