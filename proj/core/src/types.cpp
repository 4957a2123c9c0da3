#include "layoutfuse/types.hpp"

#include "layoutfuse/error.hpp"

namespace layoutfuse {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kFused:
      return "fused";
    case Provenance::kTeacher:
      return "teacher";
    case Provenance::kLlmSoft:
      return "llm-soft";
  }
  return "teacher";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "fused") return Provenance::kFused;
  if (s == "teacher") return Provenance::kTeacher;
  if (s == "llm-soft") return Provenance::kLlmSoft;
  throw DatasetError("unknown provenance '" + std::string(s) + "'");
}

}  // namespace layoutfuse
