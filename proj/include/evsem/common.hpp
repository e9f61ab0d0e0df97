#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace evsem {

using Rational = mpq_class;

// Parses "n/d", "n" or an exact decimal such as "0.125".
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);

enum class ErrorCode {
  kSyntax,
  kFlavorViolation,
  kUnboundVariable,
  kSeqLeftRecursion,
  kSharedQubitInPar,
  kUnknownGate,
  kNotAConfiguration,
  kNotInitial,
  kZeroProbabilityRemoval,
  kAnnotationMismatch,
  kNotAChain,
  kNonCommutingParallel,
  kWeightsNotNormalized,
  kDimensionMismatch,
  kFlavorMismatch,
  kChainDisagreement,
  kDropConditionViolation,
  kPreconditionNotProjective,
  kInvalidInput,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& what)
      : Error(ErrorCode::kSyntax,
              "at offset " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace evsem
