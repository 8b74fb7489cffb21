#pragma once

/// @file errors.hpp
/// Exception hierarchy shared by every critmatrix module.
///
/// Each error carries a stable machine-readable code (used verbatim in
/// service error bodies) plus an optional locus pointing at the offending
/// element, field or text position.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace critmatrix {

/// A single finding produced by artifact or project validation.
struct Diagnostic {
  std::string path;     ///< Element path, e.g. "FMEA_0/rows/2/probability_of_occurrence".
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string locus = {})
      : std::runtime_error(message), code_(std::move(code)), locus_(std::move(locus)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& locus() const noexcept { return locus_; }

 private:
  std::string code_;
  std::string locus_;
};

#define CRITMATRIX_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& message, std::string locus = {})        \
        : Error(#Name, message, std::move(locus)) {}                         \
  }

CRITMATRIX_DEFINE_ERROR(ParseError);
CRITMATRIX_DEFINE_ERROR(MissingProbability);
CRITMATRIX_DEFINE_ERROR(DomainError);
CRITMATRIX_DEFINE_ERROR(EndpointNotFound);
CRITMATRIX_DEFINE_ERROR(DuplicateRelation);
CRITMATRIX_DEFINE_ERROR(KindMismatch);
CRITMATRIX_DEFINE_ERROR(SelfLoop);
CRITMATRIX_DEFINE_ERROR(UnknownFault);
CRITMATRIX_DEFINE_ERROR(UnknownGuard);
CRITMATRIX_DEFINE_ERROR(GuardNotApplicable);
CRITMATRIX_DEFINE_ERROR(GuardAlreadyApplied);
CRITMATRIX_DEFINE_ERROR(GuardNotApplied);
CRITMATRIX_DEFINE_ERROR(GuardNotInRow);
CRITMATRIX_DEFINE_ERROR(EmptyHistory);
CRITMATRIX_DEFINE_ERROR(ConfigError);
CRITMATRIX_DEFINE_ERROR(StaleRevision);

#undef CRITMATRIX_DEFINE_ERROR

/// Qualified-id text did not match the grammar; position is a byte offset.
class GrammarError : public Error {
 public:
  GrammarError(const std::string& message, std::size_t position)
      : Error("GrammarError", message + " at position " + std::to_string(position),
              std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Carries every violated invariant, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics)
      : Error("ValidationError", Summarize(diagnostics),
              diagnostics.empty() ? std::string{} : diagnostics.front().path),
        diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string Summarize(const std::vector<Diagnostic>& diagnostics) {
    std::string out = std::to_string(diagnostics.size()) + " validation error(s)";
    for (const auto& d : diagnostics) out += "\n  " + d.path + ": " + d.message;
    return out;
  }

  std::vector<Diagnostic> diagnostics_;
};

}  // namespace critmatrix
