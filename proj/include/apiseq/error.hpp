#pragma once

#include <stdexcept>
#include <string>

namespace apiseq {

/// Base of every error thrown by the library. `kind()` is a stable
/// identifier (e.g. "EmptyCorpus") that the CLI maps onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define APISEQ_DEFINE_ERROR(Name)                                   \
  class Name : public ::apiseq::Error {                            \
   public:                                                          \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// javacorpus
APISEQ_DEFINE_ERROR(EmptyCorpus);
APISEQ_DEFINE_ERROR(TooFewPairs);
// tokenizer
APISEQ_DEFINE_ERROR(VocabTooSmall);
APISEQ_DEFINE_ERROR(DuplicateName);
APISEQ_DEFINE_ERROR(UnknownId);
APISEQ_DEFINE_ERROR(DimensionMismatch);
// seq2seq
APISEQ_DEFINE_ERROR(ShapeMismatch);
APISEQ_DEFINE_ERROR(FingerprintMismatch);
APISEQ_DEFINE_ERROR(NonFiniteLoss);
APISEQ_DEFINE_ERROR(VersionMismatch);
APISEQ_DEFINE_ERROR(CorruptFile);
// baselines
APISEQ_DEFINE_ERROR(DuplicateDocId);
// eval
APISEQ_DEFINE_ERROR(EmptyReference);
APISEQ_DEFINE_ERROR(EmptyList);
// cli
APISEQ_DEFINE_ERROR(ConfigError);
// generic I/O and format problems
APISEQ_DEFINE_ERROR(FormatError);
APISEQ_DEFINE_ERROR(IoError);

#undef APISEQ_DEFINE_ERROR

}  // namespace apiseq
