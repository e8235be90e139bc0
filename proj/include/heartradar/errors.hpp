#pragma once

#include <stdexcept>
#include <string>

namespace heartradar {

// Every error carries a short machine-readable code; the CLI prints
// "error: <code>: <message>" on a single line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define HEARTRADAR_DEFINE_ERROR(Name, code_str)                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(code_str, message) {} \
  }

HEARTRADAR_DEFINE_ERROR(InvalidArgument, "invalid-argument");
HEARTRADAR_DEFINE_ERROR(FormatError, "format-error");
HEARTRADAR_DEFINE_ERROR(IoError, "io-error");
HEARTRADAR_DEFINE_ERROR(NoTarget, "no-target");
HEARTRADAR_DEFINE_ERROR(LabelingFailed, "labeling-failed");
HEARTRADAR_DEFINE_ERROR(SyncFailed, "sync-failed");
HEARTRADAR_DEFINE_ERROR(AlignmentFailed, "alignment-failed");
HEARTRADAR_DEFINE_ERROR(InsufficientData, "insufficient-data");
HEARTRADAR_DEFINE_ERROR(UndefinedSnr, "undefined-snr");

#undef HEARTRADAR_DEFINE_ERROR

}  // namespace heartradar
