#pragma once

#include <stdexcept>
#include <string>

namespace fairrep {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// One of the two sensitive groups (or an (s, y) stratum) has no rows.
class EmptyGroup : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

// Malformed user input: config files, CSV contents, preprocessing rules.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairrep
