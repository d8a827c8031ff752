#ifndef DSMOOTH_ERRORS_HPP
#define DSMOOTH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dsmooth {

// Malformed or inconsistent user input (dimensions, non-finite values, bad flags).
class input_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A numerical subsolver failed to reach its tolerance.
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// An API precondition was violated by the caller (e.g. stale message caches).
class contract_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}

#endif
