#include "textcen/error.hpp"

namespace textcen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::WarpFailure: return "WarpFailure";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::DivisionDomain: return "DivisionDomain";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantError: return "InvariantError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace textcen
