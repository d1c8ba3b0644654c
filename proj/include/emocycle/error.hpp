#pragma once

#include <stdexcept>
#include <string>

namespace emocycle {

// Malformed or inconsistent input: bad files, bad configuration, violated
// dictionary invariants. The CLI maps these to exit status 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric precondition failed on otherwise well-formed data (constant
// series, no complete cycles, too few points to fit). Exit status 2.
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emocycle
