#pragma once

#include <stdexcept>
#include <string>

namespace svbm {

/// Malformed or inconsistent input data (unparseable cells, ragged rows,
/// dimension mismatches, unknown labels).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A learner could not be trained from the data it was given.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace svbm
