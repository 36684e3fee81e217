/* Copyright 2026 The Detkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace detkit {

// Bad input data or configuration. The CLI maps this family to exit code 2;
// any other exception is an internal failure (exit code 1).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& message)
      : std::runtime_error(message) {}
};

// Parse failure in a text file, pinned to a line.
class ParseError : public InputError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& message)
      : InputError(file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// A metric was requested where it has no defined value, e.g. mAP over an
// empty class set. Never silently NaN.
class UndefinedMetricError : public InputError {
 public:
  explicit UndefinedMetricError(const std::string& message)
      : InputError(message) {}
};

}  // namespace detkit
