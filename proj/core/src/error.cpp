#include "prefcon/error.hpp"

namespace prefcon {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::precondition: return "PRECONDITION";
    case Errc::not_spo: return "NOT_SPO";
    case Errc::con_not_subset: return "CON_NOT_SUBSET";
    case Errc::protection_conflict: return "PROTECTION_CONFLICT";
    case Errc::not_finitely_stratifiable: return "NOT_FINITELY_STRATIFIABLE";
    case Errc::oracle_too_large: return "ORACLE_TOO_LARGE";
    case Errc::mixed_sign_set: return "MIXED_SIGN_SET";
    case Errc::iteration_cap: return "ITERATION_CAP";
    case Errc::resource_limit: return "RESOURCE_LIMIT";
    case Errc::syntax_error: return "SYNTAX_ERROR";
    case Errc::type_error: return "TYPE_ERROR";
    case Errc::parse_error: return "PARSE_ERROR";
    case Errc::duplicate_key: return "DUPLICATE_KEY";
    case Errc::spec_on_c_attribute: return "SPEC_ON_C_ATTRIBUTE";
    case Errc::io_error: return "IO_ERROR";
    case Errc::nothing_to_undo: return "NOTHING_TO_UNDO";
    case Errc::duplicate_session: return "DUPLICATE_SESSION";
    case Errc::not_found: return "NOT_FOUND";
  }
  return "UNKNOWN";
}

}  // namespace prefcon
