/*
 * Copyright 2026 The robustpu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace robustpu {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad shapes, out-of-range hyperparameters, unknown enum names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable dataset file. Messages name the offending row/column.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// A class pool cannot satisfy the requested split sizes.
class SizingError : public Error {
 public:
  using Error::Error;
};

/// Manifest/checkpoint does not match the data it references.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient, or a degenerate training state.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Caller misuse, e.g. evaluating on an empty set.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace robustpu
