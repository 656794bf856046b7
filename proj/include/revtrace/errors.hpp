#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace revtrace {

// Base of every domain error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PositionError : public Error { using Error::Error; };
class InvalidOpError : public Error { using Error::Error; };
class IndexError : public Error { using Error::Error; };
class NotCategorizable : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class TrainError : public Error { using Error::Error; };
class EmptyInputError : public Error { using Error::Error; };
class LabelError : public Error { using Error::Error; };
class DistributionError : public Error { using Error::Error; };
class ConflictError : public Error { using Error::Error; };
class NotFoundError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };

// A sentence side lost every word to the embedding vocabulary.
class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, std::vector<std::string> dropped)
      : Error(what), dropped_(std::move(dropped)) {}
  const std::vector<std::string>& dropped() const noexcept { return dropped_; }

 private:
  std::vector<std::string> dropped_;
};

// Log line failed its checksum, sequence or parse check. Lines are 1-based.
class CorruptLogError : public Error {
 public:
  CorruptLogError(const std::string& file, std::size_t line, const std::string& why)
      : Error(file + ":" + std::to_string(line) + ": " + why), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace revtrace
