// Copyright 2026 The medkg Authors.
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

// Small string, number-formatting, hashing and RNG helpers shared by all
// modules.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace medkg {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercased runs of ASCII alphanumerics; used for whole-token matching.
std::vector<std::string> word_tokens(std::string_view s);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
// Scientific notation with 12 significant digits.
std::string format_sci12(double v);
// Fixed notation with `digits` decimals.
std::string format_fixed(double v, int digits);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// One TSV row with its 1-based source line.
struct TsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// Reads a TSV file, skipping blank lines and lines starting with '#'.
std::vector<TsvRow> read_tsv(const std::filesystem::path& path);

// Deterministic generator built on SplitMix64. The bit stream and every
// derived distribution are fully specified here, so results do not depend
// on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();
  // Uniform in [0, n).
  std::size_t uniform_index(std::size_t n);
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace medkg
