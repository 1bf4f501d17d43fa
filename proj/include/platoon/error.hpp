#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace platoon {

/// Failure categories raised by the library. The CLI maps each to an exit code.
enum class Errc {
  InvalidParameter,
  DisconnectedGraph,
  OutOfDomain,
  OutsideStabilityRegion,
  QuadratureFailure,
  UnstablePlatoon,
  InvalidSpec,
  InvalidSplit,
  SeriesDivergence,
  IllConditionedBasis,
  OutsideWindow,
  InvalidTimestep,
  NonfiniteState,
  InsufficientSamples,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace platoon
