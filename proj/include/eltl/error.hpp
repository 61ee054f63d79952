/**
 * Error type shared by every eltl module.
 *
 * Operations report failures by throwing eltl::Error. The code classifies the
 * failure so front ends (HTTP service, CLI) can map it onto status codes
 * without parsing messages.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace eltl
{
  enum class ErrorCode
  {
    invalid_input, ///< precondition violated by the caller
    not_found,     ///< referenced entity does not exist
    conflict,      ///< request is incompatible with current state
    infeasible,    ///< well-formed request with no solution
    parse,         ///< malformed document or formula text
    unsupported,   ///< recognised but not handled (version, structure)
    limit          ///< resource guard tripped
  };

  class Error : public std::runtime_error
  {
  public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
  };
}
