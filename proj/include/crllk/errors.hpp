/******************************************************************************
 * Copyright 2026 The crllk Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#pragma once

#include <stdexcept>
#include <string>

namespace crllk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed track or config text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Position too far from the lane to be projected.
class OffTrackError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked in the wrong episode phase (e.g. stepping a done state).
class LifecycleError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values encountered during an update.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value; `field` is the dotted key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class CollectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace crllk
