#pragma once

#include <stdexcept>
#include <string>

namespace bpqm {

enum class Errc {
  Singular,
  NotFullRank,
  BitIdenticallyZero,
  TooLarge,
  NotATree,
  WidthMismatch,
  RankDeficient,
  DimensionOrder,
  NotUnicyclic,
  NotLR,
  InvalidPolynomial,
  OutOfRange,
  SingularGram,
  BadInput,
};

const char* errc_name(Errc c);

/// Library-wide exception. `code()` identifies the failed precondition so
/// callers (and the CLI exit-code contract) can react without string parsing.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Singular: return "Singular";
    case Errc::NotFullRank: return "NotFullRank";
    case Errc::BitIdenticallyZero: return "BitIdenticallyZero";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NotATree: return "NotATree";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::DimensionOrder: return "DimensionOrder";
    case Errc::NotUnicyclic: return "NotUnicyclic";
    case Errc::NotLR: return "NotLR";
    case Errc::InvalidPolynomial: return "InvalidPolynomial";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::SingularGram: return "SingularGram";
    case Errc::BadInput: return "BadInput";
  }
  return "Error";
}

}  // namespace bpqm
