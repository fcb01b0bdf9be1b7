#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace copl {

struct SourcePos {
  int line = 1;
  int column = 1;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
  friend auto operator<=>(const SourcePos&, const SourcePos&) = default;
};

std::string to_string(SourcePos pos);

/// Base of every diagnostic the toolchain raises. The message never contains
/// the position; callers format `file:line:column: ...` themselves.
class Error : public std::runtime_error {
 public:
  Error(SourcePos pos, std::string message)
      : std::runtime_error(std::move(message)), pos_(pos) {}

  SourcePos pos() const { return pos_; }

  virtual const char* category() const = 0;

 protected:
  SourcePos pos_;
};

class LexError : public Error {
 public:
  using Error::Error;
  const char* category() const override { return "lex error"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* category() const override { return "parse error"; }
};

class SemError : public Error {
 public:
  using Error::Error;
  const char* category() const override { return "semantic error"; }
};

enum class RuntimeErrorKind {
  NullReference,
  NoSuchMethod,
  NoSuchField,
  UnresolvedReference,
  MissingContext,
  MissingSuper,
  IncomparableConcepts,
  MalformedResult,
  IncompatibleConcatenation,
  CreateFailed,
  UnknownConcept,
  TypeMismatch,
  DivisionByZero,
  StepLimit,
  Internal,
};

const char* to_string(RuntimeErrorKind kind);

/// Raised by the reference algebra and the runtime. `trace` lists the
/// active access chain, innermost frame first.
class RuntimeError : public Error {
 public:
  explicit RuntimeError(RuntimeErrorKind kind, std::string message)
      : Error({}, std::move(message)), kind_(kind) {}

  RuntimeError(RuntimeErrorKind kind, std::string message, SourcePos pos)
      : Error(pos, std::move(message)), kind_(kind), positioned_(true) {}

  RuntimeErrorKind kind() const { return kind_; }
  const char* category() const override { return "runtime error"; }

  bool has_position() const { return positioned_; }
  // The innermost evaluation site wins; outer frames only add trace lines.
  void set_position(SourcePos pos) {
    if (!positioned_) {
      pos_ = pos;
      positioned_ = true;
    }
  }

  std::vector<std::string>& trace() { return trace_; }
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  RuntimeErrorKind kind_;
  bool positioned_ = false;
  std::vector<std::string> trace_;
};

}  // namespace copl
