#include "evsem/common.hpp"

#include <cctype>

namespace evsem {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::string num = text.substr(0, slash), den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw Error(ErrorCode::kInvalidInput, "bad rational '" + text + "'");
    }
    mpz_class d(den, 10);
    if (d == 0) throw Error(ErrorCode::kInvalidInput, "zero denominator");
    Rational q(mpz_class(num, 10), d);
    q.canonicalize();
    return q;
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) {
    if (!all_digits(text)) {
      throw Error(ErrorCode::kInvalidInput, "bad rational '" + text + "'");
    }
    return Rational(mpz_class(text, 10));
  }
  std::string whole = text.substr(0, dot), frac = text.substr(dot + 1);
  if (whole.empty()) whole = "0";
  if (!all_digits(whole) || !all_digits(frac)) {
    throw Error(ErrorCode::kInvalidInput, "bad decimal '" + text + "'");
  }
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
  Rational q(mpz_class(whole + frac, 10), scale);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntax: return "SyntaxError";
    case ErrorCode::kFlavorViolation: return "FlavorViolation";
    case ErrorCode::kUnboundVariable: return "UnboundVariable";
    case ErrorCode::kSeqLeftRecursion: return "SeqLeftRecursion";
    case ErrorCode::kSharedQubitInPar: return "SharedQubitInPar";
    case ErrorCode::kUnknownGate: return "UnknownGate";
    case ErrorCode::kNotAConfiguration: return "NotAConfiguration";
    case ErrorCode::kNotInitial: return "NotInitial";
    case ErrorCode::kZeroProbabilityRemoval: return "ZeroProbabilityRemoval";
    case ErrorCode::kAnnotationMismatch: return "AnnotationMismatch";
    case ErrorCode::kNotAChain: return "NotAChain";
    case ErrorCode::kNonCommutingParallel: return "NonCommutingParallel";
    case ErrorCode::kWeightsNotNormalized: return "WeightsNotNormalized";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kFlavorMismatch: return "FlavorMismatch";
    case ErrorCode::kChainDisagreement: return "ChainDisagreement";
    case ErrorCode::kDropConditionViolation: return "DropConditionViolation";
    case ErrorCode::kPreconditionNotProjective:
      return "PreconditionNotProjective";
    case ErrorCode::kInvalidInput: return "InvalidInput";
  }
  return "Error";
}

}  // namespace evsem
