// Copyright 2026 The seqdfa Authors
//
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

#pragma once

#include <stdexcept>
#include <string>

namespace seqdfa {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, unknown symbols, empty classes.
class DataError : public Error {
 public:
  using Error::Error;
};

class UnknownSymbolError : public DataError {
 public:
  explicit UnknownSymbolError(const std::string& symbol)
      : DataError("unknown symbol '" + symbol + "'"), symbol_(symbol) {}

  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

// Caller violated an operation's precondition.
class UsageError : public Error {
 public:
  using Error::Error;
};

// An internal consistency check failed. Always a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqdfa
