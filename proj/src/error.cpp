#include "mife/error.hpp"

namespace mife {

std::string_view error_tag(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::signal_too_short: return "signal-too-short";
    case ErrorKind::degenerate_signal: return "degenerate-signal";
    case ErrorKind::monotone_signal: return "monotone-signal";
    case ErrorKind::empty_band: return "empty-band";
    case ErrorKind::incompatible_profiles: return "incompatible-profiles";
    case ErrorKind::degenerate_variance: return "degenerate-variance";
    case ErrorKind::too_few_samples: return "too-few-samples";
    case ErrorKind::too_few_groups: return "too-few-groups";
    case ErrorKind::io_error: return "io-error";
    case ErrorKind::parse_error: return "parse-error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::string stage)
    : std::runtime_error(std::string(error_tag(kind)) + ": " + message),
      kind_(kind),
      stage_(std::move(stage)) {}

Error Error::with_stage(std::string stage) const {
  Error e = *this;
  e.stage_ = std::move(stage);
  return e;
}

}  // namespace mife
