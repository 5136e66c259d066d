// Copyright 2026 The signform Authors.
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

#ifndef SIGNFORM_VALIDATION_HPP_
#define SIGNFORM_VALIDATION_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "signform/config.hpp"
#include "signform/synthbench.hpp"

namespace signform::validation {

struct Criterion {
  int id = 0;
  std::string title;
  // Optional criteria are listed but not part of the pass/fail verdict.
  bool required = true;
};

const std::vector<Criterion>& criteria();

struct Options {
  // Scratch space for synthetic lexica and pipeline outputs.
  std::filesystem::path work_dir;
  int threads = 1;
  // Adds 1e-3 to one weight's analytic gradient before the gradient check.
  bool inject_gradient_fault = false;
};

struct Outcome {
  int id = 0;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

Outcome run_criterion(int id, const Options& options);

// "PASS  3  MI recovery ... (12.3 s)"
std::string format_outcome(const Outcome& outcome);

// Writes a synthetic language to <dir>/<name>.tsv and .vec and returns the
// matching source entry.
LanguageSource write_synthetic_language(const synth::SyntheticSpec& spec, std::size_t n_words,
                                        std::uint64_t seed, const std::filesystem::path& dir,
                                        const std::string& name);

// Run settings sized for synthetic lexica: no search, a small network and
// a short training schedule.
RunConfig synthetic_run_config(std::vector<LanguageSource> languages,
                               const std::filesystem::path& output_dir);

}  // namespace signform::validation

#endif  // SIGNFORM_VALIDATION_HPP_
