#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mife {

// Failure categories shared by every module. The string form of each kind
// (see error_tag) is part of the CLI contract and appears in stderr messages.
enum class ErrorKind {
  invalid_argument,
  signal_too_short,
  degenerate_signal,
  monotone_signal,
  empty_band,
  incompatible_profiles,
  degenerate_variance,
  too_few_samples,
  too_few_groups,
  io_error,
  parse_error,
};

std::string_view error_tag(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string stage = {});

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view tag() const noexcept { return error_tag(kind_); }
  // Pipeline stage that raised the error ("emd", "entropy", ...), empty when
  // the error did not come from a composed method.
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const;

 private:
  ErrorKind kind_;
  std::string stage_;
};

}  // namespace mife
