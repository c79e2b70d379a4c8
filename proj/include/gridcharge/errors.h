// Copyright 2026 The gridcharge Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRIDCHARGE_ERRORS_H_
#define GRIDCHARGE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace gridcharge {

// Root of every error raised by the library. The CLI maps the three
// categories below onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent user input (exit code 2).
class InputError : public Error {
 public:
  using Error::Error;
};

// A solver failed to reach a certified answer (exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalBreakdown : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DisconnectedNetwork : public InputError {
 public:
  using InputError::InputError;
};

class NonpositiveReactance : public InputError {
 public:
  using InputError::InputError;
};

class UnbalancedInjections : public InputError {
 public:
  using InputError::InputError;
};

class OutOfDomain : public InputError {
 public:
  using InputError::InputError;
};

class MissingDistance : public InputError {
 public:
  using InputError::InputError;
};

class MalformedUtility : public InputError {
 public:
  using InputError::InputError;
};

class IncompleteIndexMap : public Error {
 public:
  using Error::Error;
};

class InfiniteCap : public InputError {
 public:
  using InputError::InputError;
};

class UnknownTemplate : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

// Carries a JSON-pointer style location such as "/network/lines/0/x".
class ValidationError : public InputError {
 public:
  ValidationError(std::string path, const std::string& message)
      : InputError(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Every price level violates the network constraints (exit code 3).
class AllLevelsInfeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace gridcharge

#endif  // GRIDCHARGE_ERRORS_H_
