#pragma once

#include <stdexcept>
#include <string>

namespace dh {

/// Input geometry violates a precondition (bad file, non-manifold, wrong topology).
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical stage failed: singular system, non-convergence, invalid geometry produced.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dh
