#ifndef TAXAGG_ERRORS_HPP
#define TAXAGG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace taxagg {

// Exit-code families used by the CLI; see README for the table.
enum class ErrorCode {
  generic = 1,
  usage = 2,
  parse = 3,
  domain = 4,
  numeric = 5,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

class ParseError : public Error {
public:
  ParseError(const std::string& file, long line, const std::string& what)
      : Error(ErrorCode::parse, file + ":" + std::to_string(line) + ": " + what),
        file_(file), line_(line) {}
  const std::string& file() const { return file_; }
  long line() const { return line_; }

private:
  std::string file_;
  long line_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class EmptyInputError : public Error {
public:
  explicit EmptyInputError(const std::string& what) : Error(ErrorCode::parse, what) {}
};

class UnknownClassError : public Error {
public:
  explicit UnknownClassError(const std::string& class_id)
      : Error(ErrorCode::domain, "unknown class: " + class_id) {}
};

class CycleError : public Error {
public:
  explicit CycleError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class NoCommonAncestorError : public Error {
public:
  NoCommonAncestorError(const std::string& a, const std::string& b)
      : Error(ErrorCode::domain, "no common ancestor of '" + a + "' and '" + b + "'") {}
};

class PathExplosionError : public Error {
public:
  explicit PathExplosionError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class InvalidScoreError : public Error {
public:
  explicit InvalidScoreError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class KeyMismatchError : public Error {
public:
  explicit KeyMismatchError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class FanoutError : public Error {
public:
  explicit FanoutError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

class TreewidthError : public Error {
public:
  explicit TreewidthError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

class TooLargeError : public Error {
public:
  explicit TooLargeError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

class NonFiniteError : public Error {
public:
  explicit NonFiniteError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

class InsufficientDataError : public Error {
public:
  explicit InsufficientDataError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class NonImprovingLikelihoodError : public Error {
public:
  explicit NonImprovingLikelihoodError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

}  // namespace taxagg

#endif
