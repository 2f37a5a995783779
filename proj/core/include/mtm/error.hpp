// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mtm {

/// Base of every error raised by the library. The category decides the
/// process exit code used by the command-line tool.
class Error : public std::runtime_error {
 public:
  enum class Category { kIo, kParse, kValidation, kConfig, kContract };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Category::kIo, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(Category::kParse, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(Category::kValidation, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::kConfig, what) {}
};

/// Violated precondition or numeric contract (shape mismatch, unknown id, ...).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(Category::kContract, what) {}
};

class DimensionError : public ContractError {
 public:
  DimensionError(const std::string& op, const std::string& detail)
      : ContractError(op + ": dimension mismatch: " + detail) {}
};

class LookupError : public ContractError {
 public:
  explicit LookupError(const std::string& what) : ContractError(what) {}
};

}  // namespace mtm
