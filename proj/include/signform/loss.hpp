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

#ifndef SIGNFORM_LOSS_HPP_
#define SIGNFORM_LOSS_HPP_

#include <vector>

namespace signform {

// Bits spent by one model on one word. Positions cover every phone plus the
// closing end-of-string token, so token_count = |form| + 1.
struct WordLoss {
  double total_bits = 0.0;
  int token_count = 0;
  std::vector<double> position_bits;
};

// One evaluated model over a set of signs, identified by lexicon index.
struct PerWordLoss {
  std::vector<int> sign_ids;
  std::vector<WordLoss> words;

  std::size_t size() const noexcept { return words.size(); }
  bool empty() const noexcept { return words.empty(); }
};

}  // namespace signform

#endif  // SIGNFORM_LOSS_HPP_
