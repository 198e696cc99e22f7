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

#include "uti2speech/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace uti2speech {

double mcd(const MatD& ref, const MatD& test) {
  require(ref.rows == test.rows, "refused",
          "frame counts differ (" + std::to_string(ref.rows) + " vs " +
              std::to_string(test.rows) + "); align before comparing");
  require(ref.cols == test.cols && ref.cols >= 2, "refused",
          "coefficient counts differ or too small");
  require(ref.rows >= 1, "refused", "empty sequences");
  const double scale = 10.0 / std::log(10.0);
  double acc = 0.0;
  for (int t = 0; t < ref.rows; ++t) {
    double ss = 0.0;
    for (int d = 1; d < ref.cols; ++d) {
      const double diff = ref.at(t, d) - test.at(t, d);
      ss += diff * diff;
    }
    acc += scale * std::sqrt(2.0 * ss);
  }
  return acc / ref.rows;
}

MatD waveform_to_melcepstra(const Waveform& wav) {
  MgcConfig cfg;
  cfg.gamma = 0.0;
  return analyze_mgc(wav, cfg);
}

void write_mcd_report(const std::string& path, const McdReport& report) {
  std::ofstream out(path);
  require(out.good(), "io-error", "cannot write " + path);
  out << "utterance\tmcd_db\tframes\n";
  for (size_t i = 0; i < report.utterance.size(); ++i)
    out << report.utterance[i] << "\t" << report.value_db[i] << "\t"
        << report.frames_used[i] << "\n";
  out << "mean\t" << report.mean_db << "\t-\n";
}

namespace {

// Mid-rank assignment over the pooled sample; returns U of the first group.
double u_statistic(const std::vector<double>& pooled,
                   const std::vector<bool>& in_a, int n_a) {
  const int n = static_cast<int>(pooled.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return pooled[x] < pooled[y]; });
  double rank_sum_a = 0.0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double mid_rank = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k)
      if (in_a[order[k]]) rank_sum_a += mid_rank;
    i = j + 1;
  }
  return rank_sum_a - 0.5 * n_a * (n_a + 1);
}

RanksumResult exact_ranksum(const std::vector<double>& pooled, int n_a,
                            double u_obs) {
  const int n = static_cast<int>(pooled.size());
  std::vector<bool> mask(n, false);
  std::fill(mask.end() - n_a, mask.end(), true);  // lowest permutation
  long total = 0, le = 0, ge = 0;
  const double eps = 1e-9;
  do {
    const double u = u_statistic(pooled, mask, n_a);
    ++total;
    if (u <= u_obs + eps) ++le;
    if (u >= u_obs - eps) ++ge;
  } while (std::next_permutation(mask.begin(), mask.end()));
  RanksumResult res;
  res.u = u_obs;
  res.exact = true;
  res.p = std::min(1.0, 2.0 * std::min(le, ge) / static_cast<double>(total));
  res.significant = res.p < 0.05;
  return res;
}

}  // namespace

RanksumResult ranksum_test(const std::vector<double>& a,
                           const std::vector<double>& b) {
  require(!a.empty() && !b.empty(), "refused", "empty sample");
  const int n_a = static_cast<int>(a.size());
  const int n_b = static_cast<int>(b.size());
  const int n = n_a + n_b;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<bool> in_a(n, false);
  std::fill(in_a.begin(), in_a.begin() + n_a, true);
  const double u_obs = u_statistic(pooled, in_a, n_a);

  if (n_a < kRanksumExactLimit && n_b < kRanksumExactLimit)
    return exact_ranksum(pooled, n_a, u_obs);

  // Tie-corrected normal approximation with continuity correction.
  std::map<double, int> tie_counts;
  for (double v : pooled) ++tie_counts[v];
  double tie_term = 0.0;
  for (const auto& [value, count] : tie_counts)
    tie_term += static_cast<double>(count) * count * count - count;
  const double mu = 0.5 * n_a * n_b;
  const double var =
      (static_cast<double>(n_a) * n_b / 12.0) *
      ((n + 1.0) - tie_term / (static_cast<double>(n) * (n - 1.0)));
  RanksumResult res;
  res.u = u_obs;
  res.exact = false;
  if (var <= 0.0) {
    res.p = 1.0;
  } else {
    const double diff = u_obs - mu;
    const double corrected =
        diff > 0.5 ? diff - 0.5 : (diff < -0.5 ? diff + 0.5 : 0.0);
    const double z = corrected / std::sqrt(var);
    res.p = std::erfc(std::fabs(z) / std::sqrt(2.0));
  }
  res.significant = res.p < 0.05;
  return res;
}

std::vector<std::string> MushraScores::systems() const {
  std::set<std::string> names;
  for (const auto& row : rows) names.insert(row.system);
  return {names.begin(), names.end()};
}

std::vector<double> MushraScores::scores_for(const std::string& system) const {
  std::vector<double> out;
  for (const auto& row : rows)
    if (row.system == system) out.push_back(row.score);
  return out;
}

MushraScores read_mushra_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "io-error", "cannot open " + path);
  MushraScores scores;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    MushraScores::Row row;
    std::string score_field;
    if (!std::getline(ss, row.listener, ',') ||
        !std::getline(ss, row.system, ',') ||
        !std::getline(ss, row.sentence, ',') ||
        !std::getline(ss, score_field)) {
      fail("malformed-scores", path + ":" + std::to_string(lineno) +
                                   ": expected listener,system,sentence,score");
    }
    if (lineno == 1 && score_field.find_first_not_of("0123456789 ") !=
                           std::string::npos) {
      continue;  // header row
    }
    try {
      row.score = std::stoi(score_field);
    } catch (const std::exception&) {
      fail("malformed-scores",
           path + ":" + std::to_string(lineno) + ": bad score " + score_field);
    }
    require(row.score >= 0 && row.score <= 100, "malformed-scores",
            path + ":" + std::to_string(lineno) + ": score outside [0, 100]");
    scores.rows.push_back(std::move(row));
  }
  return scores;
}

void write_mushra_report(const std::string& path, const MushraScores& scores) {
  const auto systems = scores.systems();
  std::ofstream out(path);
  require(out.good(), "io-error", "cannot write " + path);
  out << "system_a\tsystem_b\tU\tp\tsignificant_at_0.05\n";
  for (size_t i = 0; i < systems.size(); ++i) {
    for (size_t j = i + 1; j < systems.size(); ++j) {
      const auto res = ranksum_test(scores.scores_for(systems[i]),
                                    scores.scores_for(systems[j]));
      out << systems[i] << "\t" << systems[j] << "\t" << res.u << "\t"
          << res.p << "\t" << (res.significant ? "yes" : "no") << "\n";
    }
  }
}

}  // namespace uti2speech
