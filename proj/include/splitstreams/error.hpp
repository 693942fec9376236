#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace splitstreams {

/// Base class for every error raised while loading or laying out a dataset.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document syntax or schema. `line`/`column` are 1-based; 0 when
/// the problem is not tied to a text position (e.g. a wrong field type).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// The parent/child relation is not a tree, or node values are inconsistent.
class StructureError : public Error {
 public:
  StructureError(const std::string& what, std::string node = {})
      : Error(what), node_(std::move(node)) {}

  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// A predecessor/successor reference cannot be resolved or contradicts another.
class LinkError : public Error {
 public:
  using Error::Error;
};

/// Invalid render or layout parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace splitstreams
