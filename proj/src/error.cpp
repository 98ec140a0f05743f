#include "widthflow/error.hpp"

namespace widthflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveCurvature: return "NonPositiveCurvature";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeHypothesisUnmet: return "ShapeHypothesisUnmet";
    case ErrorKind::ConvexityLost: return "ConvexityLost";
    case ErrorKind::FitRankDeficient: return "FitRankDeficient";
    case ErrorKind::CentroidOutside: return "CentroidOutside";
    case ErrorKind::InvalidSurface: return "InvalidSurface";
    case ErrorKind::TangledMesh: return "TangledMesh";
    case ErrorKind::InitialNotConvex: return "InitialNotConvex";
    case ErrorKind::EmptySlice: return "EmptySlice";
    case ErrorKind::ProjectionFailed: return "ProjectionFailed";
    case ErrorKind::NoGeodesicFound: return "NoGeodesicFound";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::InsufficientStep: return "InsufficientStep";
    case ErrorKind::NotExtinct: return "NotExtinct";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace widthflow
