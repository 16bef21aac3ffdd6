#pragma once

#include <stdexcept>
#include <string>

namespace mfwidth {

enum class ErrorKind {
  InvalidInput,       // precondition on caller-supplied data violated
  ScaleExceedsSignal,
  DegenerateVariance,
  NonConcaveSpectrum,
  UnsupportedEncoding,
  MalformedContainer,
  SilentClip,
  SegmentOutOfRange,
  Internal,
};

// Single exception type for the library; callers switch on kind() when they
// need to map failures onto exit codes or error records.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mfwidth
