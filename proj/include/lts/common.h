// include/lts/common.h

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

#ifndef LTS_COMMON_H_
#define LTS_COMMON_H_

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace lts {

// Default scalar type for all numerics in the toolkit. Gradient checks
// against central finite differences require double precision.
using real = double;

// Process exit codes, shared between the CLI and the error hierarchy.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitDependency = 3,
  kExitData = 4,
  kExitNumerical = 5,
};

class Error : public std::runtime_error {
 public:
  Error(std::string msg, int exit_code)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

// Bad flags / bad invocation.
struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error(m, kExitUsage) {}
};

// A pluggable backend (SSL features, vocoder, ASR, G2P) is not available.
struct DependencyError : Error {
  explicit DependencyError(const std::string& m) : Error(m, kExitDependency) {}
};

// Malformed or inconsistent input data, missing caches, bad shapes.
struct DataError : Error {
  explicit DataError(const std::string& m) : Error(m, kExitData) {}
};

// Non-finite values, degenerate statistics, failed decompositions.
struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error(m, kExitNumerical) {}
};

// Internal invariant violation; a bug, not a user error.
struct InternalError : Error {
  explicit InternalError(const std::string& m) : Error(m, kExitInternal) {}
};

inline std::string strprintf(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char buf[1024];
  vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return std::string(buf);
}

template <class E = InternalError>
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw E(msg);
}

}  // namespace lts

#endif  // LTS_COMMON_H_
