#ifndef KPSEQ_ERROR_HPP_
#define KPSEQ_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kpseq {

/// Raised for malformed or inconsistent input data (files, documents, stores).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
  DataError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what) {}
};

/// Raised when tensor or sequence shapes disagree.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace kpseq

#endif  // KPSEQ_ERROR_HPP_
