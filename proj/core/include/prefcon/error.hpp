#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace prefcon {

enum class Errc {
  precondition,
  not_spo,
  con_not_subset,
  protection_conflict,
  not_finitely_stratifiable,
  oracle_too_large,
  mixed_sign_set,
  iteration_cap,
  resource_limit,
  syntax_error,
  type_error,
  parse_error,
  duplicate_key,
  spec_on_c_attribute,
  io_error,
  nothing_to_undo,
  duplicate_session,
  not_found,
};

std::string_view to_string(Errc code);

// Every failure the engine reports. `detail` carries structured context
// (conflicting edges, a stratifiability report, a source position).
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& message, nlohmann::json detail = nullptr)
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

private:
  Errc code_;
  nlohmann::json detail_;
};

}  // namespace prefcon
