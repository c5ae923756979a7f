// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_ERROR_H_
#define SEDFPD_ERROR_H_

#include <stdexcept>
#include <string>

namespace sedfpd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the file and 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Well-formed input that violates a domain invariant
/// (onset >= offset, threshold ordering, bad config value, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. backward() without a retained forward pass.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Non-finite quantity encountered during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace sedfpd

#endif  // SEDFPD_ERROR_H_
