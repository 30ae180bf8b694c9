#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace actree {

/// Failure with a stable, machine-readable code (e.g. "UnknownGraftVertex").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

  /// True for failures that indicate a numerical-integrity problem rather than bad input.
  bool is_integrity_failure() const noexcept {
    static constexpr std::string_view kIntegrity[] = {
        "BandEdgePole",      "RankAmbiguous",      "ToleranceAmbiguity",
        "HigherOrderPole",   "QuadratureNotConverged", "IntegrityFailure"};
    for (auto c : kIntegrity) {
      if (code_ == c) return true;
    }
    return false;
  }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

}  // namespace actree
