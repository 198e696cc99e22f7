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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uti2speech {

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

struct SplitRatios {
  double train = 0.85;
  double validation = 0.10;
  double test = 0.05;
};

// Deterministic shuffled split with largest-remainder rounding of the
// ratios. The shuffle is a Fisher-Yates pass driven by std::mt19937_64
// (j = r % (i+1)), which is fully pinned by the C++ standard, so the
// same ids + seed give the same split on every platform.
DatasetSplit split_dataset(std::vector<std::string> utterance_ids,
                           uint64_t seed, const SplitRatios& ratios = {});

// Line-oriented manifest: "<id>\t<train|val|test>".
void write_split(const std::string& path, const DatasetSplit& split);
DatasetSplit read_split(const std::string& path);

}  // namespace uti2speech
