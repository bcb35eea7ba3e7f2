#pragma once

#include <stdexcept>
#include <string>

namespace ubae {

enum class ErrorCode {
  argument,
  evaluation_failure,
  index_overflow,
  geometry_too_tight,
  degenerate_domain,
  inconsistent_classification,
  kernel_undefined,
  double_layer_inapplicable,
  closure_degeneracy,
  under_resolved_boundary,
  extrapolation_stencil,
  formulation_singular,
  singular_system,
  assembly,
  box_too_small,
  coverage,
  io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ubae
