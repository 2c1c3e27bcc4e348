#ifndef PDOPRIOR_ERRORS_HPP
#define PDOPRIOR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pdoprior {

/// The symbol vanishes (or changes sign) somewhere on the grid and band.
class EllipticityError : public std::runtime_error {
public:
  explicit EllipticityError(const std::string& what) : std::runtime_error(what) {}
};

/// A recursion or iteration produced non-finite or runaway values.
class InstabilityError : public std::runtime_error {
public:
  explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pdoprior

#endif  // PDOPRIOR_ERRORS_HPP
