#pragma once

#include <stdexcept>
#include <string>

namespace sirs {

/// Bad input: scenario, grid or coefficient that breaks a stated invariant.
/// The command-line front end maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine did not reach its tolerance. Maps to exit code 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A derived constant whose defining hypothesis does not hold for the scenario
/// (e.g. the large-lambda threshold when gamma* is not positive).
class InapplicableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace sirs
