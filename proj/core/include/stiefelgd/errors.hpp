#pragma once

#include <stdexcept>
#include <string>

namespace stiefelgd {

/// Frames, matrices, or grids with incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values entering a frame or model.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A Gram matrix lost numerical rank (retractions, qR, Cholesky).
class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// G = [[phi, A^{-1} phi]] (or its inexact analogue) is not invertible.
class DegenerateFrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operator failed a positive-definiteness test.
class NotSpdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model, solver, or line-search parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace stiefelgd
