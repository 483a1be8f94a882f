#include "aoa/errors.hpp"

namespace aoa {

std::string_view to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::MissingSegment: return "MissingSegment";
    case FormatErrorKind::SegmentOrder: return "SegmentOrder";
    case FormatErrorKind::UnknownAttribution: return "UnknownAttribution";
    case FormatErrorKind::UnknownAction: return "UnknownAction";
    case FormatErrorKind::ActionArity: return "ActionArity";
  }
  return "FormatError";
}

}  // namespace aoa
