#pragma once

#include <stdexcept>
#include <string>

namespace tofskin {

// Error classes map one-to-one onto CLI exit codes; see tools/main.cpp.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NetworkError : std::runtime_error {
  explicit NetworkError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tofskin
