// Copyright 2026 SQS Contributors
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

namespace sqs {

// Exit-code contract: usage/config problems map to 2, numeric failures to 3.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

class DimensionError : public UsageError {
 public:
  using UsageError::UsageError;
};

class IngestionError : public UsageError {
 public:
  using UsageError::UsageError;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double last_estimate)
      : NumericError(what), last_estimate_(last_estimate) {}

  double last_estimate() const { return last_estimate_; }

 private:
  double last_estimate_;
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const NumericError*>(&e) != nullptr) return 3;
  return 1;
}

}  // namespace sqs
