#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpos {

enum class Errc {
  invalid_argument,
  invalid_resource,
  precondition,
  infeasible,
  protocol_violation,
  infinite_arithmetic,
  io,
  validation,
  internal,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace dpos
