#pragma once

#include <stdexcept>
#include <string>

namespace lossyhom {

// Invalid input: malformed config, bad key, parameter outside its contract.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Valid input that cannot be evaluated: non-positive variance, under-resolved
// quadrature, empty feasible region.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lossyhom
