// Copyright 2026 The gap-forge Authors
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

#ifndef GAPFORGE_ERRORS_HPP_
#define GAPFORGE_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gapforge {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NegativeMass : public Error {
 public:
  using Error::Error;
};

class MassNotOne : public Error {
 public:
  using Error::Error;
};

class MissingEmbedding : public Error {
 public:
  using Error::Error;
};

class UnknownSymbol : public Error {
 public:
  using Error::Error;
};

class LossStrategyMismatch : public Error {
 public:
  using Error::Error;
};

// Log-loss hit a zero belief on a positive-mass outcome. Reported, never
// silently clipped.
class InfiniteLoss : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class NonFiniteActivation : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(const std::string& what, long round = -1)
      : Error(what), round_(round) {}
  long round() const { return round_; }

 private:
  long round_;
};

// Parse failure; offset points at the first violating line of the file.
class FileFormatError : public Error {
 public:
  FileFormatError(std::string path, std::size_t line, const std::string& message)
      : Error(path + ":" + std::to_string(line) + ": " + message),
        path_(std::move(path)),
        line_(line) {}
  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

}  // namespace gapforge

#endif  // GAPFORGE_ERRORS_HPP_
