// Copyright 2026 The textdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace textdiff {

// Base of every error the library throws. The CLI maps subclasses to exit
// statuses (ConfigError -> 2, everything else -> 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {  // argument outside a function's domain
 public:
  using Error::Error;
};

class OrderingError : public Error {  // s >= t where s < t is required
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {  // token id or length out of range
 public:
  using Error::Error;
};

class NumericError : public Error {  // non-finite values, degenerate statistics
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public IoError {
 public:
  using IoError::IoError;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace textdiff
