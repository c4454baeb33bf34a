// otalign/error.hpp

// Copyright 2026  OTAlign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OTALIGN_ERROR_HPP_
#define OTALIGN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace otalign {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration (bad field value, inconsistent dimensions fixed at
// construction time). Messages carry the offending field path where known.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid runtime input (non-finite data, malformed labels, bad marginals).
class InputError : public Error {
 public:
  using Error::Error;
};

// API misuse (e.g. backward without a cached forward pass).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed file content; message names the file and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure; message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

// Raised when hard coupling weights leave no admissible transport pair.
class DegenerateAlignmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace otalign

#endif  // OTALIGN_ERROR_HPP_
