// ptk/common.h

// Copyright 2026 The ptk Authors
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

#ifndef PTK_COMMON_H_
#define PTK_COMMON_H_

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ptk {

// Error hierarchy. Every failure the library reports is one of these; the
// CLI maps them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (lexicon, alignment, ARPA, features, checkpoint).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A caller passed arguments outside an operation's contract.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Two inputs disagree (label missing from vocabulary, word missing from LM).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Operation applied to an object in the wrong state.
class StateError : public Error {
 public:
  using Error::Error;
};

/// An enumeration guard was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Search could not produce a result.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (NaN/Inf loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

enum class Topology { kRna, kHmm };
enum class AugmentMode { kNone, kEow, kSowEow };

std::string_view ToString(Topology topology);
std::string_view ToString(AugmentMode mode);
Topology ParseTopology(std::string_view text);
AugmentMode ParseAugmentMode(std::string_view text);

// Log-space arithmetic. Log-zero is -infinity, never a large finite stand-in,
// so an infeasible score is distinguishable from an underflowed one.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool IsLogZero(double x) { return x == kLogZero; }

inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

/// log(1 - exp(x)) for x <= 0, accurate across the whole range.
inline double Log1mExp(double x) {
  if (x >= 0.0) return kLogZero;
  if (x > -M_LN2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

// Small text helpers shared by the file readers.
std::vector<std::string_view> SplitWhitespace(std::string_view line);
std::vector<std::string_view> SplitChar(std::string_view line, char sep);
std::string_view Trim(std::string_view s);
bool IsValidUtf8(std::string_view s);
double ParseDouble(std::string_view token, std::string_view what);
long ParseInt(std::string_view token, std::string_view what);
std::string FormatDouble(double value);  // %.17g, round-trips exactly
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace ptk

#endif  // PTK_COMMON_H_
