#pragma once

#include <stdexcept>
#include <string>

namespace dynprice {

// Bad input data: unknown ids, incomplete valuations, malformed documents.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The engine contradicted one of its own invariants; always a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The market lies outside the regimes in which prices are known to exist.
class UnsupportedMarket : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dynprice
