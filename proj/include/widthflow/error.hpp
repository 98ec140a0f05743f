#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace widthflow {

enum class ErrorKind {
  NonPositiveCurvature,
  DimensionMismatch,
  ShapeHypothesisUnmet,
  ConvexityLost,
  FitRankDeficient,
  CentroidOutside,
  InvalidSurface,
  TangledMesh,
  InitialNotConvex,
  EmptySlice,
  ProjectionFailed,
  NoGeodesicFound,
  InsufficientSamples,
  InsufficientStep,
  NotExtinct,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` identifies
// the failure class so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace widthflow
