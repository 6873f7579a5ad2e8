#include "panelfe/error.hpp"

namespace panelfe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonBinaryOutcome: return "NonBinaryOutcome";
    case ErrorCode::DuplicateIndex: return "DuplicateIndex";
    case ErrorCode::EmptyPanel: return "EmptyPanel";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::ConstantCovariate: return "ConstantCovariate";
    case ErrorCode::EmptyAfterDrop: return "EmptyAfterDrop";
    case ErrorCode::InvalidOption: return "InvalidOption";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::CollinearCovariates: return "CollinearCovariates";
    case ErrorCode::SingularW: return "SingularW";
    case ErrorCode::LTooLarge: return "LTooLarge";
    case ErrorCode::VariantInputMissing: return "VariantInputMissing";
    case ErrorCode::DoubleRequiresSquarePanel: return "DoubleRequiresSquarePanel";
  }
  return "UnknownError";
}

}  // namespace panelfe
