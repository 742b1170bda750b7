#pragma once

#include <stdexcept>
#include <string>

namespace riskcal {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV cells, shapes, labels).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Misuse of a model: unfitted predictor, wrong head, dimension mismatch.
class ModelError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace riskcal
