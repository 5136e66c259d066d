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

// Runs every acceptance criterion and prints one line per criterion.
// Usage: acceptance [work_dir] [threads]

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "signform/validation.hpp"

int main(int argc, char** argv) {
  signform::validation::Options opt;
  opt.work_dir = argc > 1 ? std::filesystem::path(argv[1])
                          : std::filesystem::temp_directory_path() / "signform-acceptance";
  opt.threads = argc > 2 ? std::atoi(argv[2]) : 1;
  int failed = 0;
  for (const auto& c : signform::validation::criteria()) {
    const auto outcome = signform::validation::run_criterion(c.id, opt);
    std::cout << signform::validation::format_outcome(outcome) << std::endl;
    if (c.required && !outcome.passed) ++failed;
  }
  std::cout << (failed == 0 ? "all required criteria passed"
                            : std::to_string(failed) + " required criteria failed")
            << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
