#pragma once

#include <stdexcept>
#include <string>

namespace msnlab {

// Bad or inconsistent input data / arguments. CLI maps these to exit 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid request that cannot be served (guards, empty windows,
// K larger than the instance, ...). CLI maps these to exit 2.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedRecordError : InputError {
  using InputError::InputError;
};
struct InvalidIpError : InputError {
  using InputError::InputError;
};
struct InvalidTimestampError : InputError {
  using InputError::InputError;
};
struct InvalidConfigError : InputError {
  using InputError::InputError;
};
struct UnknownSeedNodeError : InputError {
  using InputError::InputError;
};
struct UnknownPageError : InputError {
  using InputError::InputError;
};
struct UnmappedRegionError : InputError {
  using InputError::InputError;
};
struct EmptyPlacementError : InputError {
  using InputError::InputError;
};
struct DisconnectedNodeError : InputError {
  using InputError::InputError;
};

struct TooManyEdgesError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};
struct KTooLargeError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};
struct EnumerationTooLargeError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};
struct EmptyTrainWindowError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};
struct EmptyTestWindowError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};
struct EmptyMatrixError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};
struct EmptyInputError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};
struct InsufficientCellsError : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

}  // namespace msnlab
