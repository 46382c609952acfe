#pragma once

#include <stdexcept>
#include <string>

namespace misim {

// Base class for everything the simulator can throw. Each concrete type
// corresponds to one failure mode of the public API.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndexOutOfRange : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct SameRow : Error { using Error::Error; };
struct InvalidTernaryEncoding : Error { using Error::Error; };
struct InvalidControlPattern : Error { using Error::Error; };

struct IncompleteSpec : Error { using Error::Error; };
struct WidthExceeded : Error { using Error::Error; };
struct SpaceTooLarge : Error { using Error::Error; };

struct OperandOutOfRange : Error { using Error::Error; };
struct CapacityExceeded : Error { using Error::Error; };
struct ModeMismatch : Error { using Error::Error; };

struct NaRInput : Error { using Error::Error; };
struct NoMatch : Error { using Error::Error; };
struct MultipleMatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };

struct VoltageOutOfRange : Error { using Error::Error; };

struct MalformedCsv : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct InsufficientBanks : Error { using Error::Error; };
struct AllZeroTensor : Error { using Error::Error; };

struct IoError : Error { using Error::Error; };

}  // namespace misim
