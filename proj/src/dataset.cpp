// Copyright 2026 The uti2speech Authors
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

#include "uti2speech/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>

#include "uti2speech/common.hpp"

namespace uti2speech {

namespace {

// Largest-remainder apportionment of n items to the three ratios.
std::array<int, 3> apportion(int n, const SplitRatios& r) {
  const double total = r.train + r.validation + r.test;
  require(total > 0.0 && r.train >= 0.0 && r.validation >= 0.0 && r.test >= 0.0,
          "invalid-ratios", "split ratios must be nonnegative with sum > 0");
  std::array<double, 3> quota = {n * r.train / total, n * r.validation / total,
                                 n * r.test / total};
  std::array<int, 3> count;
  std::array<double, 3> frac;
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    count[i] = static_cast<int>(std::floor(quota[i]));
    frac[i] = quota[i] - count[i];
    assigned += count[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return frac[a] > frac[b]; });
  for (int k = 0; assigned < n; ++k) {
    ++count[order[k % 3]];
    ++assigned;
  }
  return count;
}

}  // namespace

DatasetSplit split_dataset(std::vector<std::string> utterance_ids,
                           uint64_t seed, const SplitRatios& ratios) {
  require(utterance_ids.size() >= 3, "too-few-utterances",
          "need at least 3 utterances, got " +
              std::to_string(utterance_ids.size()));
  // Sort first so the split depends only on the id set, not input order.
  std::sort(utterance_ids.begin(), utterance_ids.end());
  std::mt19937_64 rng(seed);
  for (size_t i = utterance_ids.size() - 1; i > 0; --i) {
    const size_t j = static_cast<size_t>(rng() % (i + 1));
    std::swap(utterance_ids[i], utterance_ids[j]);
  }
  const auto count = apportion(static_cast<int>(utterance_ids.size()), ratios);
  DatasetSplit split;
  auto it = utterance_ids.begin();
  split.train.assign(it, it + count[0]);
  it += count[0];
  split.validation.assign(it, it + count[1]);
  it += count[1];
  split.test.assign(it, it + count[2]);
  return split;
}

void write_split(const std::string& path, const DatasetSplit& split) {
  std::ofstream out(path);
  require(out.good(), "io-error", "cannot write " + path);
  for (const auto& id : split.train) out << id << "\ttrain\n";
  for (const auto& id : split.validation) out << id << "\tval\n";
  for (const auto& id : split.test) out << id << "\ttest\n";
}

DatasetSplit read_split(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "io-error", "cannot open " + path);
  DatasetSplit split;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos, "malformed-split",
            path + ":" + std::to_string(lineno) + ": expected <id>\\t<subset>");
    const std::string id = line.substr(0, tab);
    const std::string subset = line.substr(tab + 1);
    if (subset == "train") {
      split.train.push_back(id);
    } else if (subset == "val") {
      split.validation.push_back(id);
    } else if (subset == "test") {
      split.test.push_back(id);
    } else {
      fail("malformed-split",
           path + ":" + std::to_string(lineno) + ": unknown subset " + subset);
    }
  }
  return split;
}

}  // namespace uti2speech
